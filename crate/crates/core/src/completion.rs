//! Boolean completions of systems, tenacious equivalents, orbit systems `O(P, X)`,
//! reflection, and the rank-bounded completion `Ŝ`.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::guard::Guards;
use crate::hset::HSet;
use crate::name::PName;
use crate::order::{bit, BooleanAlgebra, Cond, Poset};
use crate::perm::{all_automorphisms, NormalFilter, Perm, PermGroup, Subgroup};
use crate::symmetric::res_of_profile;
use crate::system::{Profile, SymSystem};

/// A system moved to the nonzero part of the regular-open completion of its poset.
#[derive(Debug, Clone)]
pub struct BooleanLift {
    pub algebra: BooleanAlgebra,
    pub system: SymSystem,
    /// Image of each source condition.
    pub embedding: Vec<Cond>,
    /// Index in the lifted system of each source generic.
    pub generic_map: Vec<usize>,
}

impl BooleanLift {
    /// The natural translation of a name over the source poset.
    pub fn translate(&self, x: &PName) -> PName {
        x.map_conditions(&|p| self.embedding[p])
    }
}

/// Restricts each group element to a set of conditions it maps onto itself.
fn restrict_group(group: &PermGroup, keep: &[Cond], guards: &Guards) -> Result<(Arc<PermGroup>, Vec<Perm>)> {
    let mut pos = vec![usize::MAX; group.degree()];
    for (i, &c) in keep.iter().enumerate() {
        pos[c] = i;
    }
    let images: Vec<Perm> = group
        .elements()
        .iter()
        .map(|pi| Perm::from_images(keep.iter().map(|&c| pos[pi.apply(c)]).collect()))
        .collect::<Result<_>>()?;
    guards.check_group(images.len())?;
    let gens: Vec<Perm> = group.generators().iter().map(|pi| images[group.index_of(pi).expect("generator")].clone()).collect();
    let restricted = Arc::new(PermGroup::from_elements(keep.len(), images.clone(), gens)?);
    Ok((restricted, images))
}

/// A system whose group is the image of `system`'s group acting on `keep`, with the
/// image of the filter core as the least filter member.
fn restricted_system(system: &SymSystem, poset: Poset, keep: &[Cond], guards: Guards) -> Result<SymSystem> {
    let (group, images) = restrict_group(system.group(), keep, &guards)?;
    let core: Vec<Perm> = system.filter().core().iter().map(|i| images[i].clone()).collect();
    let core = group.subgroup_of(&core)?;
    SymSystem::with_core(Arc::new(poset), group, core, guards)
}

/// `S` over `B(P)⁺`, with the group acting through its lift to the algebra.
pub fn boolean_lift(system: &SymSystem) -> Result<BooleanLift> {
    let algebra = BooleanAlgebra::of(system.poset())?;
    let guards = *system.guards();
    guards.check_poset(algebra.len() - 1)?;
    let poset = algebra.forcing_poset();
    let group = system.group();
    let lifted: Vec<Perm> = group
        .elements()
        .iter()
        .map(|pi| Perm::from_images(algebra.lift(&pi.images())[1..].iter().map(|&i| i - 1).collect()))
        .collect::<Result<_>>()?;
    let gens: Vec<Perm> = group.generators().iter().map(|pi| lifted[group.index_of(pi).expect("generator")].clone()).collect();
    let lgroup = Arc::new(PermGroup::from_elements(poset.len(), lifted.clone(), gens)?);
    let core: Vec<Perm> = system.filter().core().iter().map(|i| lifted[i].clone()).collect();
    let core = lgroup.subgroup_of(&core)?;
    let lsys = SymSystem::with_core(Arc::new(poset), lgroup, core, guards)?;
    let embedding: Vec<Cond> = algebra.embedding().iter().map(|&i| i - 1).collect();
    let generic_map = system
        .atoms()
        .iter()
        .map(|&m| lsys.atoms().iter().position(|&a| a == embedding[m]).expect("atoms map to atoms"))
        .collect();
    Ok(BooleanLift { algebra, system: lsys, embedding, generic_map })
}

/// The tenacious equivalent and the data relating it to the original system.
#[derive(Debug, Clone)]
pub struct TenaciousEquivalent {
    pub system: SymSystem,
    pub lift: BooleanLift,
    /// Image of each condition of the result in the lifted system.
    pub inclusion: Vec<Cond>,
}

/// The subalgebra of `B(P)` of elements whose stabilizer is in the filter, with the same
/// group and filter.
pub fn tenacious_equivalent(system: &SymSystem) -> Result<TenaciousEquivalent> {
    let lift = boolean_lift(system)?;
    let bsys = &lift.system;
    let tenacious = bsys.tenacious_conditions();
    let keep: Vec<Cond> = bsys.poset().conds().filter(|&c| tenacious & bit(c) != 0).collect();
    let bp = bsys.poset();
    let labels: Vec<String> = keep.iter().map(|&c| bp.label(c).to_string()).collect();
    let top = keep.iter().position(|&c| c == bp.top()).expect("the top is fixed by every element");
    let poset = Poset::from_fn(labels, top, |p, q| bp.leq(keep[p], keep[q]))?;
    let out = restricted_system(bsys, poset, &keep, *system.guards())?;
    Ok(TenaciousEquivalent { system: out, lift, inclusion: keep })
}

/// A class name cut down to finitely many entries `(p, ẋ)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassName(PName);

impl ClassName {
    pub fn new(entries: impl IntoIterator<Item = (Cond, PName)>) -> ClassName {
        ClassName(PName::new(entries))
    }

    pub fn from_name(name: PName) -> ClassName {
        ClassName(name)
    }

    pub fn name(&self) -> &PName {
        &self.0
    }

    /// `X^G` at each generic, as a set of values.
    pub fn values(&self, system: &SymSystem) -> Vec<BTreeSet<HSet>> {
        system.generics().iter().map(|&g| self.0.eval(g).elems().iter().cloned().collect()).collect()
    }
}

/// `(P, Aut(P), {Aut(P)})`, used to evaluate automorphism actions on generics.
fn automorphism_system(poset: Arc<Poset>, guards: Guards) -> Result<SymSystem> {
    let auts = all_automorphisms(&poset, &guards)?;
    let group = Arc::new(PermGroup::from_elements(poset.len(), auts.clone(), auts)?);
    let whole = group.whole();
    SymSystem::with_core(poset, group, whole, guards)
}

/// Every profile choosing a member of `values[g]` at each generic `g`.
fn choice_profiles(values: &[BTreeSet<HSet>], guards: &Guards) -> Result<Vec<Profile>> {
    let count = values.iter().fold(1u128, |acc, v| acc.saturating_mul(v.len() as u128));
    guards.check_names(count)?;
    let mut out: Vec<Profile> = vec![Vec::new()];
    for slot in values {
        out = out.iter().flat_map(|f| slot.iter().map(move |v| [f.as_slice(), &[v.clone()]].concat())).collect();
    }
    Ok(out)
}

/// `O(P, X)` for the class whose value at generic `g` is `values[g]`: the automorphisms
/// preserving the class, with the filter generated by the respect groups of the names
/// forced into it.
pub fn orbit_system_from_values(poset: Arc<Poset>, values: &[BTreeSet<HSet>], guards: Guards) -> Result<SymSystem> {
    let aut = automorphism_system(poset.clone(), guards)?;
    if values.len() != aut.generics().len() {
        return Err(Error::Precondition("one value set per generic is required".into()));
    }
    let preserved: Vec<Perm> = (0..aut.group().order())
        .filter(|&pi| (0..values.len()).all(|g| values[aut.act_generic(aut.group().inv(pi), g)] == values[g]))
        .map(|pi| aut.group().element(pi).clone())
        .collect();
    let group = Arc::new(PermGroup::from_elements(poset.len(), preserved.clone(), preserved)?);
    let whole = group.whole();
    let acting = SymSystem::with_core(poset.clone(), group.clone(), whole.clone(), guards)?;
    let mut respect: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut gens: Vec<Subgroup> = Vec::new();
    for f in choice_profiles(values, &guards)? {
        let h = res_of_profile(&acting, &f);
        if respect.insert(h.iter().collect()) {
            gens.push(h);
        }
    }
    if gens.is_empty() {
        gens.push(whole);
    }
    let filter = NormalFilter::normal_closure(group, gens)?;
    SymSystem::new(poset, filter, guards)
}

/// `O(P, X)`.
pub fn orbit_system(poset: &Poset, class: &ClassName, guards: Guards) -> Result<SymSystem> {
    let poset = Arc::new(poset.clone());
    let aut = automorphism_system(poset.clone(), guards)?;
    orbit_system_from_values(poset, &class.values(&aut), guards)
}

fn class_profile(system: &SymSystem, class: &ClassName) -> Profile {
    system.profile(class.name())
}

/// `X` reflects to `x`: both have the same automorphisms forced to preserve them.
pub fn reflects(poset: &Poset, class: &ClassName, x: &PName, guards: Guards) -> Result<bool> {
    let aut = automorphism_system(Arc::new(poset.clone()), guards)?;
    Ok(res_of_profile(&aut, &class_profile(&aut, class)) == res_of_profile(&aut, &aut.profile(x)))
}

/// `X` reflects to some name forced into `X`.
pub fn self_reflects(poset: &Poset, class: &ClassName, guards: Guards) -> Result<bool> {
    let aut = automorphism_system(Arc::new(poset.clone()), guards)?;
    let target = res_of_profile(&aut, &class_profile(&aut, class));
    Ok(choice_profiles(&class.values(&aut), &guards)?.iter().any(|f| res_of_profile(&aut, f) == target))
}

/// The rank-`k` approximation of `Ŝ = O(B(P), N•)`.
#[derive(Debug, Clone)]
pub struct Completion {
    pub system: SymSystem,
    pub rank: usize,
    pub lift: BooleanLift,
}

/// `O(B(P), X)` where `X` collects the names of rank at most `k` forced into the symmetric
/// model of `system`. Its value at a generic is the rank-`k` symmetric model there.
pub fn completion(system: &SymSystem, k: usize) -> Result<Completion> {
    system.guards().check_rank(k)?;
    let lift = boolean_lift(system)?;
    let mut values = vec![BTreeSet::new(); lift.system.generics().len()];
    for (g, &target) in lift.generic_map.iter().enumerate() {
        values[target] = system.model_at(g, k)?;
    }
    let out = orbit_system_from_values(lift.system.poset().clone(), &values, *system.guards())?;
    Ok(Completion { system: out, rank: k, lift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::name::apply;

    #[test]
    fn lift_of_p3_matches_p3() {
        let lift = boolean_lift(&ssym()).unwrap();
        assert_eq!(lift.system.poset().len(), 3);
        assert_eq!(lift.system.group().order(), 2);
        assert_eq!(lift.generic_map.len(), 2);
        let x = lift.translate(&a_dot());
        assert_eq!(lift.system.profile(&x), ssym().profile(&a_dot()).iter().enumerate().fold(vec![HSet::empty(); 2], |mut acc, (g, v)| {
            acc[lift.generic_map[g]] = v.clone();
            acc
        }));
    }

    #[test]
    fn tenacious_equivalents() {
        let t = tenacious_equivalent(&striv()).unwrap();
        assert_eq!(t.system.poset().len(), 3);
        assert!(t.system.is_tenacious());
        let t = tenacious_equivalent(&ssym()).unwrap();
        assert_eq!(t.system.poset().len(), 1);
        assert!(t.system.is_tenacious());
        let again = tenacious_equivalent(&t.system).unwrap();
        assert!(again.system.same_up_to_labels(&t.system));
    }

    #[test]
    fn orbit_systems() {
        let p = p3();
        let empty = orbit_system(&p, &ClassName::new([]), Guards::default()).unwrap();
        assert_eq!(empty.group().order(), 2);
        assert_eq!(empty.filter().core().len(), 2);
        let single = orbit_system(&p, &ClassName::new([(0, a_dot())]), Guards::default()).unwrap();
        assert_eq!(single.group().order(), 1);
        // Check names of rank ≤ 1 can be mixed into a name only the identity respects.
        let checks = ClassName::new([(0, PName::empty()), (0, PName::new([(0, PName::empty())]))]);
        let o = orbit_system(&p, &checks, Guards::default()).unwrap();
        assert_eq!(o.group().order(), 2);
        assert_eq!(o.filter().core().len(), 1);
    }

    #[test]
    fn reflection_examples() {
        let p = p3();
        let g = Guards::default();
        assert!(reflects(&p, &ClassName::new([(0, a_dot())]), &a_dot(), g).unwrap());
        let both = ClassName::new([(0, a_dot()), (0, apply(&tau(), &a_dot()))]);
        assert!(!reflects(&p, &both, &a_dot(), g).unwrap());
        assert!(self_reflects(&p, &ClassName::new([(0, a_dot())]), g).unwrap());
        // The witness may pick the same value at both generics.
        assert!(self_reflects(&p, &both, g).unwrap());
    }

    #[test]
    fn completions() {
        let c = completion(&point_system(), 2).unwrap();
        assert_eq!(c.system.poset().len(), 1);
        assert_eq!(c.system.group().order(), 1);
        for s in [striv(), ssym()] {
            let c = completion(&s, 2).unwrap();
            assert!(c.system.is_tenacious());
            let again = completion(&c.system, 2).unwrap();
            assert!(again.system.same_up_to_labels(&c.system));
        }
    }
}
