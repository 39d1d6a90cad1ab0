//! Generic filters, the forcing relation, and symmetric forcing.
//!
//! Atomic forcing has two implementations. [`Forcer`] follows the usual recursion on
//! names, computing for each pair of names the set of conditions that force the
//! relation. [`forces_semantic`] quantifies over the generic filters containing the
//! condition; it is the reference the recursion is tested against.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::formula::{eval, Assignment, Formula, Rel};
use crate::guard::pow2;
use crate::name::PName;
use crate::order::{bit, members, Cond, CondSet, Poset};
use crate::symmetric::is_hs;
use crate::system::SymSystem;

/// A generic filter over a finite poset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenericFilter {
    pub conds: CondSet,
    /// The minimal condition the filter is the cone above.
    pub atom: Cond,
    /// Checked against the symmetrically dense sets only.
    pub symmetric: bool,
}

/// The generic filters of `P`: the cones above minimal conditions.
pub fn enumerate_generics(poset: &Poset) -> Vec<GenericFilter> {
    poset
        .atoms()
        .into_iter()
        .map(|m| GenericFilter { conds: poset.above(m), atom: m, symmetric: false })
        .collect()
}

/// Filters meeting every symmetrically dense set.
///
/// Every filter on a finite poset is a cone `{q : q ≥ p}`. Such a cone misses some
/// symmetrically dense set exactly when the union of the core orbits avoiding it is
/// dense, since any symmetric set avoiding the cone lies inside that union.
pub fn enumerate_symmetric_generics(system: &SymSystem) -> Vec<GenericFilter> {
    let poset = system.poset();
    let orbits = system.core_orbits();
    let mut out: Vec<GenericFilter> = Vec::new();
    for p in poset.conds() {
        let cone = poset.above(p);
        if out.iter().any(|g| g.conds == cone) {
            continue;
        }
        let avoiding = orbits.iter().filter(|&&o| o & cone == 0).fold(0, |acc, &o| acc | o);
        if !poset.is_dense(avoiding) {
            out.push(GenericFilter { conds: cone, atom: p, symmetric: true });
        }
    }
    out
}

/// Dense sets that are unions of core orbits, i.e. stabilized by a filter member.
pub fn symmetrically_dense_sets(system: &SymSystem) -> Result<Vec<CondSet>> {
    let orbits = system.core_orbits();
    system.guards().check_names(pow2(orbits.len()))?;
    let poset = system.poset();
    let mut out = Vec::new();
    for choice in 0u64..(1u64 << orbits.len()) {
        let set = members(choice as u128).fold(0, |acc, i| acc | orbits[i]);
        if poset.is_dense(set) {
            out.push(set);
        }
    }
    out.sort();
    Ok(out)
}

/// `ẋ^G`.
pub fn interpret(x: &PName, filter: CondSet) -> crate::hset::HSet {
    x.eval(filter)
}

/// The recursive forcing relation for atomic formulas, memoized per pair of names.
pub struct Forcer<'a> {
    poset: &'a Poset,
    memo: HashMap<(Rel, u32, u32), CondSet>,
}

impl<'a> Forcer<'a> {
    pub fn new(poset: &'a Poset) -> Forcer<'a> {
        Forcer { poset, memo: HashMap::new() }
    }

    /// Conditions forcing `x rel y`.
    pub fn forcing_set(&mut self, rel: Rel, x: &PName, y: &PName) -> CondSet {
        if let Some(&m) = self.memo.get(&(rel, x.id(), y.id())) {
            return m;
        }
        let m = match rel {
            Rel::Eq => self.forcing_set(Rel::Sub, x, y) & self.forcing_set(Rel::Sub, y, x),
            Rel::Sub => self.subset(x, y),
            Rel::In => self.member(x, y),
        };
        self.memo.insert((rel, x.id(), y.id()), m);
        m
    }

    pub fn forces(&mut self, p: Cond, rel: Rel, x: &PName, y: &PName) -> bool {
        self.forcing_set(rel, x, y) & bit(p) != 0
    }

    /// Conditions below which `{q : q meets target}` is dense.
    fn dense_closure(&self, target: CondSet) -> CondSet {
        // q has an extension in target iff q lies in the upward closure of target.
        self.poset.up_closure(target)
    }

    /// `p ⊩ x ⊆ y` iff for every `(r, τ) ∈ x` the conditions `q` with some
    /// `(r', σ) ∈ y`, `q ≤ r'`, `q ⊩ τ = σ` are dense below `p` and `r`.
    fn subset(&mut self, x: &PName, y: &PName) -> CondSet {
        let poset = self.poset;
        let mut good = poset.all();
        for (r, tau) in x.entries() {
            let mut witnesses: CondSet = 0;
            for (r2, sigma) in y.entries() {
                witnesses |= poset.below(*r2) & self.forcing_set(Rel::Eq, tau, sigma);
            }
            let reach = self.dense_closure(witnesses);
            let below_r = poset.below(*r);
            good &= poset.conds().filter(|&p| poset.below(p) & below_r & !reach == 0).fold(0, |acc, p| acc | bit(p));
        }
        good
    }

    /// `p ⊩ x ∈ y` iff the conditions `q` with some `(r, σ) ∈ y`, `q ≤ r`,
    /// `q ⊩ x = σ` are dense below `p`.
    fn member(&mut self, x: &PName, y: &PName) -> CondSet {
        let poset = self.poset;
        let mut witnesses: CondSet = 0;
        for (r, sigma) in y.entries() {
            witnesses |= poset.below(*r) & self.forcing_set(Rel::Eq, x, sigma);
        }
        let reach = self.dense_closure(witnesses);
        poset.conds().filter(|&p| poset.below(p) & !reach == 0).fold(0, |acc, p| acc | bit(p))
    }
}

/// `p ⊩ x rel y` by the recursion.
pub fn forces_atomic(poset: &Poset, p: Cond, rel: Rel, x: &PName, y: &PName) -> Result<bool> {
    if p >= poset.len() {
        return Err(Error::UnknownCondition(p.to_string()));
    }
    Ok(Forcer::new(poset).forces(p, rel, x, y))
}

/// Whether `rel` holds between two hereditary sets.
pub fn holds(rel: Rel, a: &crate::hset::HSet, b: &crate::hset::HSet) -> bool {
    match rel {
        Rel::In => b.contains(a),
        Rel::Eq => a == b,
        Rel::Sub => a.is_subset(b),
    }
}

/// Conditions forcing `x rel y`, by quantifying over generic filters.
pub fn forcing_set_semantic(poset: &Poset, rel: Rel, x: &PName, y: &PName) -> CondSet {
    let generics = enumerate_generics(poset);
    let good: Vec<bool> = generics.iter().map(|g| holds(rel, &x.eval(g.conds), &y.eval(g.conds))).collect();
    poset
        .conds()
        .filter(|&p| generics.iter().zip(&good).all(|(g, &ok)| ok || g.conds & bit(p) == 0))
        .fold(0, |acc, p| acc | bit(p))
}

/// `p ⊩ x rel y` iff the relation holds at every generic filter containing `p`.
pub fn forces_semantic(poset: &Poset, p: Cond, rel: Rel, x: &PName, y: &PName) -> Result<bool> {
    if p >= poset.len() {
        return Err(Error::UnknownCondition(p.to_string()));
    }
    Ok(forcing_set_semantic(poset, rel, x, y) & bit(p) != 0)
}

/// Outcome of a symmetric forcing query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForceOutcome {
    pub holds: bool,
    /// A generic containing the condition where the formula fails.
    pub counterexample: Option<GenericFilter>,
}

/// `p ⊩_S φ(args)`: the formula holds in the symmetric model of every symmetric generic
/// containing `p`. Bounded formulas are absolute, so they are evaluated on values.
pub fn sym_forces_detail(system: &SymSystem, p: Cond, f: &Formula, args: &[PName]) -> Result<ForceOutcome> {
    if p >= system.poset().len() {
        return Err(Error::UnknownCondition(p.to_string()));
    }
    for (i, x) in args.iter().enumerate() {
        if !is_hs(system, x) {
            return Err(Error::NotSymmetric(format!("argument x{i}")));
        }
    }
    if f.slot_count() > args.len() {
        return Err(Error::Precondition(format!("formula uses {} slots, {} given", f.slot_count(), args.len())));
    }
    for g in enumerate_symmetric_generics(system) {
        if g.conds & bit(p) == 0 {
            continue;
        }
        let env = Assignment::slots(args.iter().map(|x| x.eval(g.conds)).collect());
        if !eval(&env, f)? {
            return Ok(ForceOutcome { holds: false, counterexample: Some(g) });
        }
    }
    Ok(ForceOutcome { holds: true, counterexample: None })
}

pub fn sym_forces(system: &SymSystem, p: Cond, f: &Formula, args: &[PName]) -> Result<bool> {
    Ok(sym_forces_detail(system, p, f, args)?.holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::formula::parse;
    use crate::hset::HSet;
    use crate::name::check_name;

    #[test]
    fn generics_of_fixtures() {
        let p = p3();
        let gens: Vec<CondSet> = enumerate_generics(&p).into_iter().map(|g| g.conds).collect();
        assert_eq!(gens, vec![0b011, 0b101]);
        assert_eq!(enumerate_generics(&Poset::point()).len(), 1);
        assert_eq!(enumerate_generics(&l2()).len(), 4);
        for s in [ssym(), striv(), point_system(), l2_system()] {
            let plain: Vec<CondSet> = enumerate_generics(s.poset()).into_iter().map(|g| g.conds).collect();
            let sym: Vec<CondSet> = enumerate_symmetric_generics(&s).into_iter().map(|g| g.conds).collect();
            assert_eq!(plain, sym);
        }
    }

    #[test]
    fn interpretation_examples() {
        let p = p3();
        let ga = p.above(p.cond("a").unwrap());
        assert_eq!(interpret(&u_dot(), ga), HSet::ordinal(1));
        let v = HSet::parse("{{},{{{}}}}").unwrap();
        assert_eq!(interpret(&check_name(p.top(), &v), ga), v);
        assert_eq!(interpret(&a_dot(), p.above(p.cond("b").unwrap())), HSet::empty());
    }

    #[test]
    fn atomic_forcing_examples() {
        let p = p3();
        let a = p.cond("a").unwrap();
        let one = p.top();
        let check1 = check_name(one, &HSet::ordinal(1));
        assert!(forces_atomic(&p, a, Rel::In, &zero_dot(), &a_dot()).unwrap());
        assert!(forces_atomic(&p, one, Rel::Eq, &u_dot(), &check1).unwrap());
        assert!(forces_atomic(&p, one, Rel::Eq, &a_dot(), &a_dot()).unwrap());
        assert!(!forces_atomic(&p, one, Rel::In, &zero_dot(), &a_dot()).unwrap());
        assert!(forces_semantic(&p, a, Rel::In, &zero_dot(), &a_dot()).unwrap());
        assert!(forces_atomic(&p, 9, Rel::In, &zero_dot(), &a_dot()).is_err());
    }

    #[test]
    fn sym_forcing_examples() {
        let s = ssym();
        let one = s.top();
        let check1 = check_name(one, &HSet::ordinal(1));
        assert!(sym_forces(&s, one, &parse("x0 = x1").unwrap(), &[u_dot(), check1]).unwrap());
        assert!(sym_forces(&s, 1, &parse("x0 in x1").unwrap(), &[zero_dot(), u_dot()]).unwrap());
        assert!(sym_forces(&s, 2, &parse("x0 = x0").unwrap(), &[u_dot()]).unwrap());
        assert!(matches!(
            sym_forces(&s, one, &parse("x0 = x0").unwrap(), &[a_dot()]),
            Err(Error::NotSymmetric(_))
        ));
        let out = sym_forces_detail(&striv(), one, &parse("x0 in x1").unwrap(), &[zero_dot(), a_dot()]).unwrap();
        assert!(!out.holds);
        assert_eq!(out.counterexample.unwrap().atom, 2);
    }

    #[test]
    fn symmetrically_dense_examples() {
        let s = ssym();
        let sets = symmetrically_dense_sets(&s).unwrap();
        assert!(sets.contains(&0b110));
        assert!(!sets.contains(&0b010));
        assert!(!sets.contains(&0b011));
        let all_dense: Vec<CondSet> = (0..8u128).filter(|&d| s.poset().is_dense(d)).collect();
        assert_eq!(symmetrically_dense_sets(&striv()).unwrap(), all_dense);
    }
}
