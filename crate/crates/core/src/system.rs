//! Symmetric systems `(P, G, F)` and their semantic data.
//!
//! Over a finite poset the generic filters are the cones above minimal conditions,
//! so a name is determined semantically by its *profile*: its value at each generic.
//! Forced equality, respect groups and symmetric models are all computed from
//! profiles.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use parking_lot::Mutex;

use crate::bits::ElemSet;
use crate::error::{Error, Result};
use crate::guard::Guards;
use crate::hset::HSet;
use crate::name::PName;
use crate::order::{bit, members, Cond, CondSet, Poset};
use crate::perm::{check_automorphism, NormalFilter, Perm, PermGroup, Subgroup};

/// Values of a name at each generic, indexed like [`SymSystem::generics`].
pub type Profile = Vec<HSet>;

/// A set of generic indices.
pub type GenSet = u128;

/// Problems found when checking a candidate system.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a candidate triple without building it: every generator is an automorphism,
/// each filter generator is a subgroup, and the filter is normal.
pub fn validate_parts(poset: &Poset, group_gens: &[Perm], filter_gens: &[Vec<Perm>], guards: &Guards) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (i, g) in group_gens.iter().enumerate() {
        if let Err(e) = check_automorphism(poset, g) {
            report.violations.push(format!("group generator {i}: {e}"));
        }
    }
    if !report.is_valid() {
        return report;
    }
    let group = match PermGroup::generate(poset, group_gens, guards) {
        Ok(g) => Arc::new(g),
        Err(e) => {
            report.violations.push(e.to_string());
            return report;
        }
    };
    let mut subgroups = Vec::new();
    for (i, gens) in filter_gens.iter().enumerate() {
        match group.subgroup_of(gens) {
            Ok(h) => subgroups.push(h),
            Err(_) => report.violations.push(format!("filter generator {i} leaves the group")),
        }
    }
    if report.is_valid() {
        if let Err(e) = NormalFilter::new(group, subgroups) {
            report.violations.push(e.to_string());
        }
    }
    report
}

/// A symmetric system over a finite poset.
pub struct SymSystem {
    poset: Arc<Poset>,
    group: Arc<PermGroup>,
    filter: NormalFilter,
    guards: Guards,
    atoms: Vec<Cond>,
    generics: Vec<CondSet>,
    /// For each condition, the generics containing it.
    gen_of: Vec<GenSet>,
    /// For each group element, its action on generic indices.
    gen_action: Vec<Vec<usize>>,
    hs_levels: Mutex<Vec<Arc<Vec<PName>>>>,
    model_levels: Mutex<Vec<Arc<Vec<Profile>>>>,
}

impl fmt::Debug for SymSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymSystem")
            .field("poset", &self.poset)
            .field("group_order", &self.group.order())
            .field("filter", &self.filter)
            .finish()
    }
}

impl Clone for SymSystem {
    fn clone(&self) -> Self {
        SymSystem::assemble(self.poset.clone(), self.filter.clone(), self.guards)
    }
}

impl PartialEq for SymSystem {
    /// Extensional: same poset, same group elements, same filter members.
    fn eq(&self, other: &Self) -> bool {
        *self.poset == *other.poset && *self.group == *other.group && self.filter.core() == other.filter.core()
    }
}

impl SymSystem {
    pub fn new(poset: Arc<Poset>, filter: NormalFilter, guards: Guards) -> Result<SymSystem> {
        let group = filter.group().clone();
        if group.degree() != poset.len() {
            return Err(Error::InvalidAutomorphism("group acts on a different poset".into()));
        }
        guards.check_poset(poset.len())?;
        guards.check_group(group.order())?;
        for g in group.elements() {
            check_automorphism(&poset, g)?;
        }
        if !filter.is_normal() {
            return Err(Error::NotNormal("filter".into()));
        }
        Ok(SymSystem::assemble(poset, filter, guards))
    }

    /// Builds a system from generators: the group they generate and the filter generated
    /// by the given subgroups (each listed by generators).
    pub fn from_generators(poset: Poset, group_gens: &[Perm], filter_gens: &[Vec<Perm>], guards: Guards) -> Result<SymSystem> {
        let report = validate_parts(&poset, group_gens, filter_gens, &guards);
        if let Some(v) = report.violations.first() {
            return Err(Error::Precondition(v.clone()));
        }
        let group = Arc::new(PermGroup::generate(&poset, group_gens, &guards)?);
        let subgroups = filter_gens.iter().map(|g| group.subgroup_of(g)).collect::<Result<Vec<_>>>()?;
        let filter = NormalFilter::new(group, subgroups)?;
        SymSystem::new(Arc::new(poset), filter, guards)
    }

    /// `(P, G, {H : H ⊇ core})`.
    pub fn with_core(poset: Arc<Poset>, group: Arc<PermGroup>, core: Subgroup, guards: Guards) -> Result<SymSystem> {
        let filter = NormalFilter::principal(group, core)?;
        SymSystem::new(poset, filter, guards)
    }

    fn assemble(poset: Arc<Poset>, filter: NormalFilter, guards: Guards) -> SymSystem {
        let group = filter.group().clone();
        let atoms = poset.atoms();
        let generics: Vec<CondSet> = atoms.iter().map(|&m| poset.above(m)).collect();
        let mut gen_of = vec![0; poset.len()];
        for (gi, &g) in generics.iter().enumerate() {
            for p in members(g) {
                gen_of[p] |= 1u128 << gi;
            }
        }
        let gen_index: HashMap<CondSet, usize> = generics.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let gen_action = group
            .elements()
            .iter()
            .map(|pi| generics.iter().map(|&g| gen_index[&pi.apply_set(g)]).collect())
            .collect();
        SymSystem {
            poset,
            group,
            filter,
            guards,
            atoms,
            generics,
            gen_of,
            gen_action,
            hs_levels: Mutex::new(Vec::new()),
            model_levels: Mutex::new(Vec::new()),
        }
    }

    pub fn poset(&self) -> &Arc<Poset> {
        &self.poset
    }

    pub fn group(&self) -> &Arc<PermGroup> {
        &self.group
    }

    pub fn filter(&self) -> &NormalFilter {
        &self.filter
    }

    pub fn guards(&self) -> &Guards {
        &self.guards
    }

    pub fn with_guards(&self, guards: Guards) -> SymSystem {
        SymSystem::assemble(self.poset.clone(), self.filter.clone(), guards)
    }

    pub fn top(&self) -> Cond {
        self.poset.top()
    }

    /// Generic filters, one per class of minimal conditions, ordered by least atom.
    pub fn generics(&self) -> &[CondSet] {
        &self.generics
    }

    pub fn atoms(&self) -> &[Cond] {
        &self.atoms
    }

    pub fn all_generics(&self) -> GenSet {
        if self.generics.len() >= 128 {
            u128::MAX
        } else {
            (1u128 << self.generics.len()) - 1
        }
    }

    /// Generics containing `p`.
    #[inline]
    pub fn generics_of(&self, p: Cond) -> GenSet {
        self.gen_of[p]
    }

    /// Index of `π``G`.
    #[inline]
    pub fn act_generic(&self, pi: usize, g: usize) -> usize {
        self.gen_action[pi][g]
    }

    /// The profile of `x`.
    pub fn profile(&self, x: &PName) -> Profile {
        self.generics.iter().map(|&g| x.eval(g)).collect()
    }

    /// The profile of `π(x)`, computed from the profile of `x`: `π(x)^G = x^{π⁻¹G}`.
    pub fn act_profile(&self, pi: usize, profile: &[HSet]) -> Profile {
        let inv = self.group.inv(pi);
        (0..self.generics.len()).map(|g| profile[self.act_generic(inv, g)].clone()).collect()
    }

    /// Generics where a per-generic predicate holds.
    pub fn generics_where(&self, holds: impl Fn(usize) -> bool) -> GenSet {
        (0..self.generics.len()).filter(|&g| holds(g)).fold(0, |acc, g| acc | (1u128 << g))
    }

    /// Conditions all of whose generics lie in `good`.
    pub fn conditions_within(&self, good: GenSet) -> CondSet {
        self.poset.conds().filter(|&p| self.gen_of[p] & !good == 0).fold(0, |acc, p| acc | bit(p))
    }

    /// `{π : π(p) = p}`.
    pub fn fix(&self, p: Cond) -> Subgroup {
        self.group.stabilizer(p)
    }

    /// Conditions whose stabilizer lies in the filter.
    pub fn tenacious_conditions(&self) -> CondSet {
        self.poset.conds().filter(|&p| self.filter.admits(&self.fix(p))).fold(0, |acc, p| acc | bit(p))
    }

    /// The conditions with `fix(p) ∈ F` are dense.
    pub fn is_tenacious(&self) -> bool {
        self.poset.is_dense(self.tenacious_conditions())
    }

    /// Orbits of the filter core on conditions.
    pub fn core_orbits(&self) -> Vec<CondSet> {
        self.group.orbits(self.filter.core())
    }

    /// The validation report of this system (always valid once constructed).
    pub fn validate(&self) -> ValidationReport {
        let gens: Vec<Perm> = self.group.elements().to_vec();
        let filter_gens: Vec<Vec<Perm>> = self
            .filter
            .generators()
            .iter()
            .map(|h| h.iter().map(|i| self.group.element(i).clone()).collect())
            .collect();
        validate_parts(&self.poset, &gens, &filter_gens, &self.guards)
    }

    pub(crate) fn hs_cache(&self) -> &Mutex<Vec<Arc<Vec<PName>>>> {
        &self.hs_levels
    }

    /// Profiles of all hereditarily symmetric names of rank at most `k`.
    ///
    /// A name is symmetric exactly when it is a union of orbits of the filter core on
    /// its entries, so these profiles are the unions of orbit profiles. An orbit of the
    /// entry `(p, y)` contributes `{y^{π⁻¹G} : π ∈ core, p ∈ π⁻¹G}` at the generic `G`.
    pub fn model_profiles(&self, k: usize) -> Result<Arc<Vec<Profile>>> {
        self.guards.check_rank(k)?;
        let mut levels = self.model_levels.lock();
        if levels.is_empty() {
            levels.push(Arc::new(vec![vec![HSet::empty(); self.generics.len()]]));
        }
        while levels.len() <= k {
            let prev = levels.last().expect("level 0 present").clone();
            let core: Vec<usize> = self.filter.core().iter().collect();
            let mut gens: BTreeSet<Vec<BTreeSet<HSet>>> = BTreeSet::new();
            for p in self.poset.conds() {
                for f in prev.iter() {
                    let mut at: Vec<BTreeSet<HSet>> = vec![BTreeSet::new(); self.generics.len()];
                    for (g, slot) in at.iter_mut().enumerate() {
                        for &pi in &core {
                            let src = self.act_generic(self.group.inv(pi), g);
                            if self.gen_of[p] & (1u128 << src) != 0 {
                                slot.insert(f[src].clone());
                            }
                        }
                    }
                    gens.insert(at);
                }
            }
            let mut closed: BTreeSet<Vec<BTreeSet<HSet>>> = BTreeSet::new();
            closed.insert(vec![BTreeSet::new(); self.generics.len()]);
            for v in &gens {
                let grown: Vec<_> = closed
                    .iter()
                    .map(|s| s.iter().zip(v).map(|(a, b)| a.union(b).cloned().collect()).collect())
                    .collect();
                closed.extend(grown);
                self.guards.check_names(closed.len() as u128)?;
            }
            let level: Vec<Profile> =
                closed.into_iter().map(|s| s.into_iter().map(HSet::new).collect()).collect();
            let mut level = level;
            level.sort();
            levels.push(Arc::new(level));
        }
        Ok(levels[k].clone())
    }

    /// Same system after matching conditions by label: the order, the group and the
    /// filter core all correspond.
    pub fn same_up_to_labels(&self, other: &SymSystem) -> bool {
        let (a, b) = (&self.poset, &other.poset);
        if a.len() != b.len() {
            return false;
        }
        let Ok(map) = a.conds().map(|p| b.cond(a.label(p))).collect::<Result<Vec<Cond>>>() else {
            return false;
        };
        if a.conds().any(|p| a.conds().any(|q| a.leq(p, q) != b.leq(map[p], map[q]))) {
            return false;
        }
        let carry = |pi: &Perm| {
            let mut images = vec![0; map.len()];
            for p in a.conds() {
                images[map[p]] = map[pi.apply(p)];
            }
            Perm::from_images(images).expect("relabelled permutation")
        };
        let mine: BTreeSet<Perm> = self.group.elements().iter().map(carry).collect();
        let theirs: BTreeSet<Perm> = other.group.elements().iter().cloned().collect();
        let my_core: BTreeSet<Perm> = self.filter.core().iter().map(|i| carry(self.group.element(i))).collect();
        let their_core: BTreeSet<Perm> = other.filter.core().iter().map(|i| other.group.element(i).clone()).collect();
        mine == theirs && my_core == their_core
    }

    /// The rank-`k` symmetric model at a generic: values of symmetric names of rank ≤ k.
    pub fn model_at(&self, g: usize, k: usize) -> Result<BTreeSet<HSet>> {
        Ok(self.model_profiles(k)?.iter().map(|f| f[g].clone()).collect())
    }
}

/// All hereditary sets of rank at most `k`.
pub fn sets_of_rank(k: usize) -> Vec<HSet> {
    let mut level = vec![HSet::empty()];
    for _ in 0..k {
        let n = level.len();
        let mut next = Vec::with_capacity(1 << n);
        for mask in 0u64..(1u64 << n) {
            next.push(HSet::new((0..n).filter(|i| mask & (1 << i) != 0).map(|i| level[i].clone())));
        }
        next.sort();
        level = next;
    }
    level
}

/// The subgroup of elements whose action on generics fixes every profile in `profiles`.
pub fn respecting_group(system: &SymSystem, within: &Subgroup, profiles: &[&[HSet]]) -> Subgroup {
    let g = system.group();
    ElemSet::from_iter(
        g.order(),
        within.iter().filter(|&pi| profiles.iter().all(|f| system.act_profile(pi, f).as_slice() == *f)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{ssym, striv};

    #[test]
    fn tenacity_examples() {
        assert!(striv().is_tenacious());
        assert!(!ssym().is_tenacious());
    }

    #[test]
    fn validation_examples() {
        assert!(ssym().validate().is_valid());
        let p = crate::fixtures::p3();
        let g = [crate::fixtures::tau()];
        let id = Perm::identity(3);
        assert!(validate_parts(&p, &g, &[vec![id]], &Guards::default()).is_valid());
        // Swapping the top with an atom is not order preserving.
        let bad = Perm::from_images(vec![1, 0, 2]).unwrap();
        assert!(!validate_parts(&p, &[bad], &[], &Guards::default()).is_valid());
    }

    #[test]
    fn models_are_all_small_sets() {
        // Every generic of a finite poset lies in the ground model, so the rank-k
        // symmetric model is exactly the sets of rank at most k.
        for s in [striv(), ssym()] {
            for k in 0..=2 {
                let expect: BTreeSet<HSet> = sets_of_rank(k).into_iter().collect();
                for g in 0..s.generics().len() {
                    assert_eq!(s.model_at(g, k).unwrap(), expect);
                }
            }
        }
    }

    #[test]
    fn profile_counts() {
        // Striv: every function from the two generics into the rank-1 sets.
        assert_eq!(striv().model_profiles(1).unwrap().len(), 4);
        assert_eq!(striv().model_profiles(2).unwrap().len(), 16);
        // Ssym: profiles must be swap-invariant, hence constant.
        assert_eq!(ssym().model_profiles(1).unwrap().len(), 2);
        assert_eq!(ssym().model_profiles(2).unwrap().len(), 4);
    }
}
