//! Symmetry of names: stabilizers, respect groups, the hereditarily symmetric
//! hierarchy, closed names, definable names and mixing.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::formula::{eval, Assignment, Formula};
use crate::guard::pow2;
use crate::hset::HSet;
use crate::name::{apply, apply_memo, check_name, PName};
use crate::order::{bit, Cond, CondSet};
use crate::perm::Subgroup;
use crate::system::{sets_of_rank, Profile, SymSystem};

/// `sym(x) = {π ∈ G : π(x) = x}`.
pub fn sym_group(system: &SymSystem, x: &PName) -> Subgroup {
    let g = system.group();
    g.filter(&g.whole(), |i| apply(g.element(i), x) == *x)
}

/// `res(x) = {π ∈ G : 1 ⊩ π(x) = x}`, using the semantic forcing relation.
pub fn res_group(system: &SymSystem, x: &PName) -> Subgroup {
    let g = system.group();
    let profile = system.profile(x);
    g.filter(&g.whole(), |i| system.profile(&apply(g.element(i), x)) == profile)
}

/// The respect group of a profile: elements whose action on generics preserves it.
pub fn res_of_profile(system: &SymSystem, profile: &[HSet]) -> Subgroup {
    let g = system.group();
    g.filter(&g.whole(), |i| system.act_profile(i, profile).as_slice() == profile)
}

/// Hereditarily symmetric: `sym` of the name and of every subname lies in the filter.
pub fn is_hs(system: &SymSystem, x: &PName) -> bool {
    let mut memo = HashMap::new();
    hs_memo(system, x, &mut memo)
}

fn hs_memo(system: &SymSystem, x: &PName, memo: &mut HashMap<u32, bool>) -> bool {
    if let Some(&v) = memo.get(&x.id()) {
        return v;
    }
    let ok = x.conditions() & !system.poset().all() == 0
        && system.filter().admits(&sym_group(system, x))
        && x.children().iter().all(|y| hs_memo(system, y, memo));
    memo.insert(x.id(), ok);
    ok
}

/// Hereditarily respected: `res` of the name and of every subname lies in the filter.
pub fn is_hr(system: &SymSystem, x: &PName) -> bool {
    fn go(system: &SymSystem, x: &PName, memo: &mut HashMap<u32, bool>) -> bool {
        if let Some(&v) = memo.get(&x.id()) {
            return v;
        }
        let ok = system.filter().admits(&res_group(system, x)) && x.children().iter().all(|y| go(system, y, memo));
        memo.insert(x.id(), ok);
        ok
    }
    go(system, x, &mut HashMap::new())
}

/// The name is forced into the rank-`k` symmetric model at every generic.
pub fn in_n(system: &SymSystem, x: &PName, k: usize) -> Result<bool> {
    for (g, &filter) in system.generics().iter().enumerate() {
        if !system.model_at(g, k)?.contains(&x.eval(filter)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A finite collection of names, optionally certified hereditarily symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameUniverse {
    pub rank: usize,
    pub names: Vec<PName>,
    pub hereditarily_symmetric: bool,
}

/// All hereditarily symmetric names of rank at most `k`.
///
/// `HS_{α+1}` consists of the unions of core orbits of entries `(p, y)` with
/// `y ∈ HS_α`, so the level is enumerated orbit by orbit.
pub fn enumerate_hs(system: &SymSystem, k: usize) -> Result<Arc<Vec<PName>>> {
    system.guards().check_rank(k)?;
    let cache = system.hs_cache();
    if let Some(level) = cache.lock().get(k) {
        return Ok(level.clone());
    }
    let mut levels: Vec<Arc<Vec<PName>>> = cache.lock().clone();
    if levels.is_empty() {
        levels.push(Arc::new(vec![PName::empty()]));
    }
    let g = system.group();
    let core: Vec<usize> = system.filter().core().iter().collect();
    while levels.len() <= k {
        let prev = levels.last().expect("level 0").clone();
        let mut memos: Vec<HashMap<u32, PName>> = core.iter().map(|_| HashMap::new()).collect();
        let mut seen: BTreeSet<(Cond, PName)> = BTreeSet::new();
        let mut orbits: Vec<Vec<(Cond, PName)>> = Vec::new();
        for p in system.poset().conds() {
            for y in prev.iter() {
                if seen.contains(&(p, y.clone())) {
                    continue;
                }
                let mut orbit = BTreeSet::new();
                for (slot, &pi) in core.iter().enumerate() {
                    let perm = g.element(pi);
                    orbit.insert((perm.apply(p), apply_memo(perm, y, &mut memos[slot])));
                }
                seen.extend(orbit.iter().cloned());
                orbits.push(orbit.into_iter().collect());
            }
        }
        system.guards().check_names(pow2(orbits.len()))?;
        let mut level = Vec::with_capacity(1 << orbits.len());
        for choice in 0u64..(1u64 << orbits.len()) {
            let entries = (0..orbits.len()).filter(|i| choice & (1 << i) != 0).flat_map(|i| orbits[i].iter().cloned());
            level.push(PName::new(entries));
        }
        level.sort();
        levels.push(Arc::new(level));
        *cache.lock() = levels.clone();
    }
    Ok(levels[k].clone())
}

pub fn hs_universe(system: &SymSystem, k: usize) -> Result<NameUniverse> {
    Ok(NameUniverse { rank: k, names: enumerate_hs(system, k)?.to_vec(), hereditarily_symmetric: true })
}

/// `cl_α` of a target profile: `{(p, y) : y ∈ HS_α, p ⊩ y ∈ target}`.
fn closure_at(system: &SymSystem, target: &[HSet], alpha: usize) -> Result<PName> {
    let level = enumerate_hs(system, alpha)?;
    let mut entries = Vec::new();
    for y in level.iter() {
        let py = system.profile(y);
        let good = system.generics_where(|g| target[g].contains(&py[g]));
        let forcing = system.conditions_within(good);
        for p in system.poset().conds().filter(|&p| forcing & bit(p) != 0) {
            entries.push((p, y.clone()));
        }
    }
    Ok(PName::new(entries))
}

/// The closed name with the given profile at the least adequate rank `α ≤ k`.
///
/// Fails with [`Error::NotSymmetric`] unless the profile is invariant under the filter
/// core, since otherwise no symmetric name has it.
pub fn realize(system: &SymSystem, target: &[HSet], k: usize) -> Result<PName> {
    let core = system.filter().core();
    if core.iter().any(|pi| system.act_profile(pi, target).as_slice() != target) {
        return Err(Error::NotSymmetric("profile is not invariant under the filter".into()));
    }
    let needed = target.iter().map(|v| v.rank().saturating_sub(1)).max().unwrap_or(0);
    for alpha in needed.min(k)..=k {
        let name = closure_at(system, target, alpha)?;
        if system.profile(&name).as_slice() == target {
            return Ok(name);
        }
    }
    Err(Error::Precondition(format!("no closed name of rank at most {k} has this profile")))
}

/// `{(m_G, w̌) : G generic, w ∈ target(G)}` where `m_G` is the atom below `G`.
///
/// Distinct atoms are incompatible, so the value at `G` is exactly `target(G)`, and
/// `π` fixes the name iff it preserves the profile. A cheap representative when the
/// closed name's rank would exceed the enumeration guards.
pub fn mixture_name(system: &SymSystem, target: &[HSet]) -> Result<PName> {
    if target.len() != system.generics().len() {
        return Err(Error::Precondition("profile length differs from the number of generics".into()));
    }
    let top = system.top();
    let mut entries = Vec::new();
    for (&m, v) in system.atoms().iter().zip(target) {
        for w in v.elems() {
            entries.push((m, check_name(top, w)));
        }
    }
    Ok(PName::new(entries))
}

/// `cl(x)`: the closure at the least `α ≤ k` with `1 ⊩ x = cl_α(x)`.
pub fn closure(system: &SymSystem, x: &PName, k: usize) -> Result<PName> {
    if !is_hs(system, x) {
        return Err(Error::NotSymmetric("closure input".into()));
    }
    let target = system.profile(x);
    for alpha in 0..=k {
        let name = closure_at(system, &target, alpha)?;
        if system.profile(&name) == target {
            return Ok(name);
        }
    }
    Err(Error::Precondition(format!("rank bound {k} too small for the closure")))
}

/// The single free variable of a defining formula.
fn defined_variable(f: &Formula) -> Result<String> {
    let free = f.free_vars();
    if free.len() != 1 {
        return Err(Error::Precondition(format!("expected exactly one free variable, found {}", free.len())));
    }
    Ok(free.into_iter().next().expect("one variable"))
}

fn check_args(system: &SymSystem, args: &[PName]) -> Result<()> {
    for (i, x) in args.iter().enumerate() {
        if !is_hs(system, x) {
            return Err(Error::NotSymmetric(format!("argument x{i}")));
        }
    }
    Ok(())
}

/// The closed name for the object defined by `φ`: its single free variable (e.g. `vy`)
/// is the defined object, and the slots `x0, x1, …` are `args`. At every generic exactly
/// one set of the rank-`k` symmetric model may satisfy `φ`.
pub fn definable_name(system: &SymSystem, f: &Formula, args: &[PName], k: usize) -> Result<PName> {
    let var = defined_variable(f)?;
    check_args(system, args)?;
    let mut target = Vec::with_capacity(system.generics().len());
    for (g, &filter) in system.generics().iter().enumerate() {
        let env = Assignment::slots(args.iter().map(|x| x.eval(filter)).collect());
        let mut found = Vec::new();
        for c in system.model_at(g, k)? {
            if eval(&env.clone().with_var(&var, c.clone()), f)? {
                found.push(c);
            }
        }
        match found.len() {
            1 => target.push(found.pop().expect("one witness")),
            0 => return Err(Error::Precondition(format!("nothing satisfies the formula at generic {g}"))),
            _ => return Err(Error::Precondition(format!("formula is not functional at generic {g}"))),
        }
    }
    realize(system, &target, k)
}

/// A name `y` with `p ⊩ y = x` and `1 ⊩ χ(y)`: equal to `x` wherever `χ(x)` holds and to
/// `z` elsewhere. `χ` has one free variable for the mixed object; slots are `extra`.
pub fn mix_names(
    system: &SymSystem,
    p: Cond,
    x: &PName,
    z: &PName,
    chi: &Formula,
    extra: &[PName],
    k: usize,
) -> Result<PName> {
    let var = defined_variable(chi)?;
    check_args(system, &[x.clone(), z.clone()])?;
    check_args(system, extra)?;
    if p >= system.poset().len() {
        return Err(Error::UnknownCondition(p.to_string()));
    }
    let mut target = Vec::with_capacity(system.generics().len());
    for &filter in system.generics() {
        let env = Assignment::slots(extra.iter().map(|e| e.eval(filter)).collect());
        let (xv, zv) = (x.eval(filter), z.eval(filter));
        let x_ok = eval(&env.clone().with_var(&var, xv.clone()), chi)?;
        if filter & bit(p) != 0 && !x_ok {
            return Err(Error::Precondition("the condition does not force χ of the first name".into()));
        }
        if !eval(&env.with_var(&var, zv.clone()), chi)? {
            return Err(Error::Precondition("χ of the fallback name is not forced".into()));
        }
        target.push(if x_ok { xv } else { zv });
    }
    realize(system, &target, k)
}

/// Mixing: if `p ⊩ ∃y χ(y)` with `y` ranging over the rank-`k` symmetric model, a single
/// symmetric name `y` with `p ⊩ χ(y)`. `None` when the statement is not forced by `p`.
pub fn mixing_witness(system: &SymSystem, p: Cond, chi: &Formula, extra: &[PName], k: usize) -> Result<Option<PName>> {
    let var = defined_variable(chi)?;
    check_args(system, extra)?;
    if p >= system.poset().len() {
        return Err(Error::UnknownCondition(p.to_string()));
    }
    let below = system.generics_of(p);
    let through: Vec<usize> = (0..system.generics().len()).filter(|&g| below & (1u128 << g) != 0).collect();
    let envs: Vec<Assignment> = through
        .iter()
        .map(|&g| Assignment::slots(extra.iter().map(|e| e.eval(system.generics()[g])).collect()))
        .collect();
    for (g, env) in through.iter().zip(&envs) {
        let mut any = false;
        for c in system.model_at(*g, k)? {
            if eval(&env.clone().with_var(&var, c), chi)? {
                any = true;
                break;
            }
        }
        if !any {
            return Ok(None);
        }
    }
    for f in system.model_profiles(k)?.iter() {
        let mut ok = true;
        for (g, env) in through.iter().zip(&envs) {
            if !eval(&env.clone().with_var(&var, f[*g].clone()), chi)? {
                ok = false;
                break;
            }
        }
        if ok {
            return mixture_name(system, f).map(Some);
        }
    }
    Err(Error::Precondition("no symmetric witness although the statement is forced".into()))
}

/// `i(x) = ⋃_{π ∈ res(x)} π({(p, i(y)) : (p, y) ∈ x})`: a symmetric name forced equal to
/// a hereditarily respected one.
pub fn hr_to_hs(system: &SymSystem, x: &PName) -> Result<PName> {
    if !is_hr(system, x) {
        return Err(Error::Precondition("name is not hereditarily respected".into()));
    }
    fn go(system: &SymSystem, x: &PName, memo: &mut HashMap<u32, PName>) -> PName {
        if let Some(y) = memo.get(&x.id()) {
            return y.clone();
        }
        let inner = PName::new(x.entries().iter().map(|(p, y)| (*p, go(system, y, memo))));
        let g = system.group();
        let mut entries = Vec::new();
        for pi in res_group(system, x).iter() {
            entries.extend(apply(g.element(pi), &inner).entries().iter().cloned());
        }
        let out = PName::new(entries);
        memo.insert(x.id(), out.clone());
        out
    }
    Ok(go(system, x, &mut HashMap::new()))
}

/// Profiles of all functions from generics into the rank-`k` sets that are invariant
/// under the filter core; these are exactly the profiles of closed symmetric names.
pub fn symmetric_profiles(system: &SymSystem, k: usize) -> Result<Vec<Profile>> {
    Ok(system.model_profiles(k)?.to_vec())
}

/// Names of rank at most `k` forced into the symmetric model, among `candidates`.
pub fn n_fragment(system: &SymSystem, candidates: &[PName], k: usize) -> Result<Vec<PName>> {
    let mut out = Vec::new();
    for x in candidates {
        if x.rank() <= k && in_n(system, x, k)? {
            out.push(x.clone());
        }
    }
    Ok(out)
}

/// Whether the ranks-`k` sets are all reachable, used by callers that need check names.
pub fn small_sets(k: usize) -> Vec<HSet> {
    sets_of_rank(k)
}

/// The set of conditions forcing `x = y`, semantically.
pub fn forced_equal_set(system: &SymSystem, x: &PName, y: &PName) -> CondSet {
    let (px, py) = (system.profile(x), system.profile(y));
    system.conditions_within(system.generics_where(|g| px[g] == py[g]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::formula::parse;
    use crate::name::{bullet_name, check_name};

    #[test]
    fn sym_examples() {
        let s = ssym();
        let g = s.group();
        assert_eq!(sym_group(&s, &u_dot()), g.whole());
        assert_eq!(sym_group(&s, &a_dot()), g.trivial());
        assert_eq!(sym_group(&s, &check_name(0, &HSet::ordinal(1))), g.whole());
    }

    #[test]
    fn res_examples() {
        let s = ssym();
        let g = s.group();
        assert_eq!(res_group(&s, &a_dot()), g.trivial());
        let both = bullet_name(0, [a_dot(), apply(&tau(), &a_dot())]);
        assert_eq!(res_group(&s, &both), g.whole());
        assert_eq!(res_group(&s, &check_name(0, &HSet::ordinal(2))), g.whole());
    }

    #[test]
    fn hs_examples() {
        let s = ssym();
        assert!(is_hs(&s, &u_dot()));
        assert!(!is_hs(&s, &a_dot()));
        assert_eq!(enumerate_hs(&striv(), 1).unwrap().len(), 8);
        assert_eq!(enumerate_hs(&s, 1).unwrap().len(), 4);
        assert_eq!(enumerate_hs(&s, 2).unwrap().len(), 256);
        assert!(matches!(enumerate_hs(&striv(), 2), Err(Error::GuardExceeded { .. })));
    }

    #[test]
    fn closure_examples() {
        let s = ssym();
        assert_eq!(closure(&s, &PName::empty(), 1).unwrap(), PName::empty());
        let cl = closure(&s, &u_dot(), 1).unwrap();
        assert!(cl.entries().contains(&(s.top(), PName::empty())));
        assert_eq!(closure(&s, &cl, 1).unwrap(), cl);
        assert!(matches!(closure(&s, &a_dot(), 1), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn definable_examples() {
        let s = ssym();
        let cl = closure(&s, &u_dot(), 2).unwrap();
        assert_eq!(definable_name(&s, &parse("vy = x0").unwrap(), &[u_dot()], 2).unwrap(), cl);
        let copy = parse("(forall vz in vy . vz in x0) and forall vz in x0 . vz in vy").unwrap();
        assert_eq!(definable_name(&s, &copy, &[u_dot()], 2).unwrap(), cl);
        let union = parse("(forall vz in vy . vz in x0 or vz in x1) and (forall vz in x0 . vz in vy) and forall vz in x1 . vz in vy").unwrap();
        let (one, zero_set) = (HSet::ordinal(1), HSet::parse("{{{}}}").unwrap());
        let y = definable_name(&s, &union, &[check_name(0, &one), check_name(0, &zero_set)], 2).unwrap();
        let expect = check_name(0, &one.union(&zero_set));
        assert_eq!(s.profile(&y), s.profile(&expect));
        assert_eq!(closure(&s, &expect, 2).unwrap(), y);
        assert!(definable_name(&s, &parse("vy in x0").unwrap(), &[check_name(0, &HSet::ordinal(2))], 2).is_err());
    }

    #[test]
    fn mixing_examples() {
        let s = striv();
        let chi = parse("vy sub x0").unwrap();
        let x = a_dot();
        let z = PName::empty();
        let top = s.top();
        let y = mix_names(&s, top, &u_dot(), &z, &chi, &[u_dot()], 2).unwrap();
        assert_eq!(s.profile(&y), s.profile(&u_dot()));
        let y = mix_names(&s, 1, &x, &z, &chi, &[u_dot()], 2).unwrap();
        assert_eq!(s.profile(&y)[0], HSet::ordinal(1));
        assert_eq!(s.profile(&y)[1], HSet::empty());
        let never = parse("vy in vy").unwrap();
        assert!(mix_names(&s, 1, &x, &z, &never, &[], 2).is_err());
    }

    #[test]
    fn hr_to_hs_examples() {
        let s = ssym();
        let both = bullet_name(0, [a_dot(), apply(&tau(), &a_dot())]);
        assert!(!is_hs(&s, &both));
        // Its children are not respected, so it is not hereditarily respected either.
        assert!(hr_to_hs(&s, &both).is_err());
        let c = check_name(0, &HSet::ordinal(2));
        assert_eq!(hr_to_hs(&s, &c).unwrap(), c);
        let t = sfree();
        let i = hr_to_hs(&t, &both).unwrap();
        assert!(is_hs(&t, &i));
        assert_eq!(t.profile(&i), t.profile(&both));
    }

    #[test]
    fn mixing_witnesses() {
        let e = check_name(0, &HSet::empty());
        let contains = parse("x0 in vy").unwrap();
        let y = mixing_witness(&ssym(), 0, &contains, &[e.clone()], 1).unwrap().unwrap();
        assert!(is_hs(&ssym(), &y));
        assert!(ssym().profile(&y).iter().all(|v| v.contains(&HSet::empty())));
        assert!(mixing_witness(&ssym(), 0, &parse("not vy = vy").unwrap(), &[], 2).unwrap().is_none());
        // Below `a` in Striv, a witness equal to ȧ exists although ȧ differs elsewhere.
        let s = striv();
        let y = mixing_witness(&s, 1, &parse("vy = x0").unwrap(), &[a_dot()], 1).unwrap().unwrap();
        let g = s.generics_where(|g| s.generics()[g] & bit(1) != 0).trailing_zeros() as usize;
        assert_eq!(s.profile(&y)[g], s.profile(&a_dot())[g]);
    }
}
