//! Automorphism groups of finite posets and normal filters of subgroups.
//!
//! A [`PermGroup`] is stored by full enumeration together with its multiplication
//! table; subgroups are bitsets over the element indices of the ambient group.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::bits::ElemSet;
use crate::error::{Error, Result};
use crate::guard::Guards;
use crate::order::{bit, members, Cond, CondSet, Poset};

/// A permutation of condition indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Arc<[u32]>);

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", &self.0[..])
    }
}

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm((0..n as u32).collect())
    }

    /// `images[p]` is the image of `p`. Fails unless this is a bijection.
    pub fn from_images(images: Vec<Cond>) -> Result<Perm> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &q in &images {
            if q >= n || std::mem::replace(&mut seen[q], true) {
                return Err(Error::InvalidAutomorphism("not a bijection".into()));
            }
        }
        Ok(Perm(images.into_iter().map(|q| q as u32).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn apply(&self, p: Cond) -> Cond {
        self.0[p] as Cond
    }

    pub fn apply_set(&self, set: CondSet) -> CondSet {
        members(set).fold(0, |acc, p| acc | bit(self.apply(p)))
    }

    pub fn images(&self) -> Vec<Cond> {
        self.0.iter().map(|&q| q as Cond).collect()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&p| self.0[p as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.len()];
        for (p, &q) in self.0.iter().enumerate() {
            inv[q as usize] = p as u32;
        }
        Perm(inv.into())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(p, &q)| p as u32 == q)
    }
}

/// Checks that `perm` is an automorphism of `poset`: order-preserving both ways and
/// fixing the top.
pub fn check_automorphism(poset: &Poset, perm: &Perm) -> Result<()> {
    if perm.len() != poset.len() {
        return Err(Error::InvalidAutomorphism(format!(
            "degree {} on a poset of size {}",
            perm.len(),
            poset.len()
        )));
    }
    if perm.apply(poset.top()) != poset.top() {
        return Err(Error::InvalidAutomorphism("top is moved".into()));
    }
    for p in poset.conds() {
        for q in poset.conds() {
            if poset.leq(p, q) != poset.leq(perm.apply(p), perm.apply(q)) {
                return Err(Error::InvalidAutomorphism(format!(
                    "order between `{}` and `{}` not preserved",
                    poset.label(p),
                    poset.label(q)
                )));
            }
        }
    }
    Ok(())
}

/// Builds an automorphism from a label map; unmentioned labels are fixed.
pub fn automorphism_from_labels<S: AsRef<str>>(poset: &Poset, map: &[(S, S)]) -> Result<Perm> {
    let mut images: Vec<Cond> = poset.conds().collect();
    for (from, to) in map {
        images[poset.cond(from.as_ref())?] = poset.cond(to.as_ref())?;
    }
    let perm = Perm::from_images(images)?;
    check_automorphism(poset, &perm)?;
    Ok(perm)
}

/// All automorphisms of `poset`, by backtracking over order profiles.
pub fn all_automorphisms(poset: &Poset, guards: &Guards) -> Result<Vec<Perm>> {
    let n = poset.len();
    let profile: Vec<(u32, u32)> =
        poset.conds().map(|p| (poset.below(p).count_ones(), poset.above(p).count_ones())).collect();
    let mut out = Vec::new();
    let mut images = vec![usize::MAX; n];
    let mut used = vec![false; n];
    images[poset.top()] = poset.top();
    used[poset.top()] = true;
    let order: Vec<Cond> = poset.conds().filter(|&p| p != poset.top()).collect();
    fn search(
        poset: &Poset,
        order: &[Cond],
        profile: &[(u32, u32)],
        images: &mut Vec<Cond>,
        used: &mut Vec<bool>,
        out: &mut Vec<Perm>,
        guards: &Guards,
    ) -> Result<()> {
        let Some((&p, rest)) = order.split_first() else {
            out.push(Perm::from_images(images.clone())?);
            return guards.check_group(out.len());
        };
        for q in poset.conds() {
            if used[q] || profile[q] != profile[p] {
                continue;
            }
            let consistent = poset.conds().filter(|&r| images[r] != usize::MAX).all(|r| {
                poset.leq(p, r) == poset.leq(q, images[r]) && poset.leq(r, p) == poset.leq(images[r], q)
            });
            if !consistent {
                continue;
            }
            images[p] = q;
            used[q] = true;
            search(poset, rest, profile, images, used, out, guards)?;
            images[p] = usize::MAX;
            used[q] = false;
        }
        Ok(())
    }
    search(poset, &order, &profile, &mut images, &mut used, &mut out, guards)?;
    out.sort();
    Ok(out)
}

/// A subgroup, as a set of element indices of its ambient group.
pub type Subgroup = ElemSet;

/// A finite group of automorphisms, fully enumerated.
#[derive(Clone)]
pub struct PermGroup {
    degree: usize,
    elements: Vec<Perm>,
    index: HashMap<Perm, usize>,
    generators: Vec<Perm>,
    mul: Vec<u32>,
    inv: Vec<u32>,
}

impl fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PermGroup")
            .field("degree", &self.degree)
            .field("order", &self.order())
            .field("generators", &self.generators)
            .finish()
    }
}

impl PartialEq for PermGroup {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.elements == other.elements
    }
}

impl Eq for PermGroup {}

impl PermGroup {
    /// The group generated by `gens`, each checked to be an automorphism of `poset`.
    pub fn generate(poset: &Poset, gens: &[Perm], guards: &Guards) -> Result<PermGroup> {
        for g in gens {
            check_automorphism(poset, g)?;
        }
        PermGroup::closure(poset.len(), gens, guards)
    }

    /// Closure of `gens` under composition, without checking they are automorphisms.
    pub fn closure(degree: usize, gens: &[Perm], guards: &Guards) -> Result<PermGroup> {
        let id = Perm::identity(degree);
        let mut elements = vec![id.clone()];
        let mut seen: HashMap<Perm, ()> = HashMap::from([(id, ())]);
        let mut frontier = 0;
        while frontier < elements.len() {
            let x = elements[frontier].clone();
            frontier += 1;
            for g in gens {
                let y = g.compose(&x);
                if seen.insert(y.clone(), ()).is_none() {
                    elements.push(y);
                    guards.check_group(elements.len())?;
                }
            }
        }
        PermGroup::from_elements(degree, elements, gens.to_vec())
    }

    /// Wraps an explicit element list; fails unless it is closed under composition.
    pub fn from_elements(degree: usize, mut elements: Vec<Perm>, generators: Vec<Perm>) -> Result<PermGroup> {
        elements.sort();
        elements.dedup();
        if elements.is_empty() || elements.iter().any(|e| e.len() != degree) {
            return Err(Error::InvalidAutomorphism("element list of wrong degree".into()));
        }
        let index: HashMap<Perm, usize> = elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let n = elements.len();
        let mut mul = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                let Some(&k) = index.get(&elements[i].compose(&elements[j])) else {
                    return Err(Error::InvalidAutomorphism("element list not closed under composition".into()));
                };
                mul[i * n + j] = k as u32;
            }
        }
        let inv = elements.iter().map(|e| index[&e.inverse()] as u32).collect();
        Ok(PermGroup { degree, elements, index, generators, mul, inv })
    }

    pub fn trivial_group(degree: usize) -> PermGroup {
        PermGroup::from_elements(degree, vec![Perm::identity(degree)], Vec::new()).expect("identity is a group")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Perm {
        &self.elements[i]
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn index_of(&self, perm: &Perm) -> Option<usize> {
        self.index.get(perm).copied()
    }

    /// Index of the identity; the identity is the lexicographically least permutation.
    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.mul[i * self.order() + j] as usize
    }

    #[inline]
    pub fn inv(&self, i: usize) -> usize {
        self.inv[i] as usize
    }

    /// `π σ π⁻¹` for indices `pi`, `sigma`.
    pub fn conj(&self, pi: usize, sigma: usize) -> usize {
        self.mul(self.mul(pi, sigma), self.inv(pi))
    }

    pub fn whole(&self) -> Subgroup {
        ElemSet::full(self.order())
    }

    pub fn trivial(&self) -> Subgroup {
        ElemSet::from_iter(self.order(), [self.identity()])
    }

    pub fn is_subgroup(&self, h: &Subgroup) -> bool {
        h.contains(self.identity()) && h.iter().all(|x| h.iter().all(|y| h.contains(self.mul(x, y))))
    }

    /// The subgroup generated by the given element indices.
    pub fn subgroup_generated(&self, gens: &[usize]) -> Subgroup {
        let mut h = self.trivial();
        let mut stack = vec![self.identity()];
        while let Some(x) = stack.pop() {
            for &g in gens {
                let y = self.mul(g, x);
                if h.insert(y) {
                    stack.push(y);
                }
            }
        }
        h
    }

    /// Looks up permutations in this group and generates the subgroup they span.
    pub fn subgroup_of(&self, perms: &[Perm]) -> Result<Subgroup> {
        let idx = perms.iter().map(|p| self.index_of(p).ok_or(Error::NotSubgroup)).collect::<Result<Vec<_>>>()?;
        Ok(self.subgroup_generated(&idx))
    }

    /// `π H π⁻¹`.
    pub fn conjugate(&self, pi: usize, h: &Subgroup) -> Subgroup {
        ElemSet::from_iter(self.order(), h.iter().map(|x| self.conj(pi, x)))
    }

    /// `{π : π(p) = p}`.
    pub fn stabilizer(&self, p: Cond) -> Subgroup {
        ElemSet::from_iter(self.order(), (0..self.order()).filter(|&i| self.elements[i].apply(p) == p))
    }

    /// Elements of `h` mapping `set` onto itself.
    pub fn set_stabilizer(&self, h: &Subgroup, set: CondSet) -> Subgroup {
        ElemSet::from_iter(self.order(), h.iter().filter(|&i| self.elements[i].apply_set(set) == set))
    }

    /// Orbits of `h` on conditions, each as a set, in order of least member.
    pub fn orbits(&self, h: &Subgroup) -> Vec<CondSet> {
        let mut seen: CondSet = 0;
        let mut out = Vec::new();
        for p in 0..self.degree {
            if seen & bit(p) != 0 {
                continue;
            }
            let orbit = h.iter().fold(0, |acc, i| acc | bit(self.elements[i].apply(p)));
            seen |= orbit;
            out.push(orbit);
        }
        out
    }

    /// Every subgroup containing `core`, in order of discovery.
    pub fn subgroups_containing(&self, core: &Subgroup) -> Vec<Subgroup> {
        let mut out = vec![core.clone()];
        let mut seen: std::collections::HashSet<Subgroup> = [core.clone()].into_iter().collect();
        let mut i = 0;
        while i < out.len() {
            let h = out[i].clone();
            i += 1;
            for x in 0..self.order() {
                if h.contains(x) {
                    continue;
                }
                let gens: Vec<usize> = h.iter().chain([x]).collect();
                let bigger = self.subgroup_generated(&gens);
                if seen.insert(bigger.clone()) {
                    out.push(bigger);
                }
            }
        }
        out
    }

    /// The subgroup of `h` whose elements satisfy `keep`.
    pub fn filter(&self, h: &Subgroup, keep: impl Fn(usize) -> bool) -> Subgroup {
        ElemSet::from_iter(self.order(), h.iter().filter(|&i| keep(i)))
    }
}

/// A normal filter of subgroups, given by generating subgroups.
///
/// At finite scale every filter of subgroups is principal: the intersection of all
/// conjugates of the generators is itself a member and is contained in every member.
/// That intersection is kept as the `core`.
#[derive(Clone, PartialEq, Eq)]
pub struct NormalFilter {
    group: Arc<PermGroup>,
    generators: Vec<Subgroup>,
    core: Subgroup,
}

impl fmt::Debug for NormalFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NormalFilter")
            .field("generators", &self.generators)
            .field("core", &self.core)
            .finish()
    }
}

impl NormalFilter {
    /// The filter generated by `generators`; fails unless each is a subgroup and the
    /// generated family is closed under conjugation.
    pub fn new(group: Arc<PermGroup>, generators: Vec<Subgroup>) -> Result<NormalFilter> {
        let filter = NormalFilter::unchecked(group, generators)?;
        if !filter.is_normal() {
            return Err(Error::NotNormal("a conjugate of a generator is missing".into()));
        }
        Ok(filter)
    }

    /// The normal filter generated by `generators` and all their conjugates.
    pub fn normal_closure(group: Arc<PermGroup>, generators: Vec<Subgroup>) -> Result<NormalFilter> {
        let mut filter = NormalFilter::unchecked(group, generators)?;
        let g = filter.group.clone();
        let mut all: Vec<Subgroup> = Vec::new();
        for h in &filter.generators {
            for pi in 0..g.order() {
                let c = g.conjugate(pi, h);
                if !all.contains(&c) {
                    all.push(c);
                }
            }
        }
        filter.generators = all;
        filter.core = filter.conjugate_core();
        Ok(filter)
    }

    /// The filter `{H : H ⊇ core}` for a normal subgroup `core`.
    pub fn principal(group: Arc<PermGroup>, core: Subgroup) -> Result<NormalFilter> {
        NormalFilter::new(group, vec![core])
    }

    fn unchecked(group: Arc<PermGroup>, generators: Vec<Subgroup>) -> Result<NormalFilter> {
        if generators.iter().any(|h| !group.is_subgroup(h)) {
            return Err(Error::NotSubgroup);
        }
        let core = generators.iter().fold(group.whole(), |acc, h| acc.intersect(h));
        Ok(NormalFilter { group, generators, core })
    }

    fn conjugate_core(&self) -> Subgroup {
        let g = &self.group;
        let mut core = g.whole();
        for h in &self.generators {
            for pi in 0..g.order() {
                core = core.intersect(&g.conjugate(pi, h));
            }
        }
        core
    }

    pub fn group(&self) -> &Arc<PermGroup> {
        &self.group
    }

    pub fn generators(&self) -> &[Subgroup] {
        &self.generators
    }

    /// The least member of the filter.
    pub fn core(&self) -> &Subgroup {
        &self.core
    }

    /// Membership by the generator characterization: `h` contains a finite intersection
    /// of conjugates of generators.
    pub fn contains(&self, h: &Subgroup) -> Result<bool> {
        if !self.group.is_subgroup(h) {
            return Err(Error::NotSubgroup);
        }
        Ok(self.conjugate_core().is_subset(h))
    }

    /// Membership for a set already known to be a subgroup, using the cached core.
    #[inline]
    pub fn admits(&self, h: &Subgroup) -> bool {
        self.core.is_subset(h)
    }

    /// The family generated by supergroups and finite intersections of the generators
    /// contains every conjugate of every generator.
    pub fn is_normal(&self) -> bool {
        let plain = self.generators.iter().fold(self.group.whole(), |acc, h| acc.intersect(h));
        let g = &self.group;
        self.generators.iter().all(|h| (0..g.order()).all(|pi| plain.is_subset(&g.conjugate(pi, h))))
    }
}

pub fn filter_contains(filter: &NormalFilter, h: &Subgroup) -> Result<bool> {
    filter.contains(h)
}

pub fn is_normal_filter(filter: &NormalFilter) -> bool {
    filter.is_normal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g2, p3, tau};

    #[test]
    fn generated_groups() {
        let p = p3();
        let g = PermGroup::generate(&p, &[tau()], &Guards::default()).unwrap();
        assert_eq!(g.order(), 2);
        let triv = PermGroup::generate(&p, &[], &Guards::default()).unwrap();
        assert_eq!(triv.order(), 1);
        let bad = Perm::from_images(vec![1, 0, 2]).unwrap();
        assert!(PermGroup::generate(&p, &[bad], &Guards::default()).is_err());
    }

    #[test]
    fn p3_automorphisms() {
        let p = p3();
        let auts = all_automorphisms(&p, &Guards::default()).unwrap();
        assert_eq!(auts.len(), 2);
    }

    #[test]
    fn filter_membership_examples() {
        let g = Arc::new(g2());
        let whole = NormalFilter::new(g.clone(), vec![g.whole()]).unwrap();
        assert!(whole.contains(&g.whole()).unwrap());
        assert!(!whole.contains(&g.trivial()).unwrap());
        let triv = NormalFilter::new(g.clone(), vec![g.trivial()]).unwrap();
        assert!(triv.contains(&g.trivial()).unwrap());
        assert!(whole.is_normal() && triv.is_normal());
        let not_subgroup = ElemSet::from_iter(2, [1]);
        assert_eq!(whole.contains(&not_subgroup), Err(Error::NotSubgroup));
    }

    #[test]
    fn stabilizers_and_conjugates() {
        let p = p3();
        let g = g2();
        let t = g.index_of(&tau()).unwrap();
        assert_eq!(g.stabilizer(p.top()), g.whole());
        assert_eq!(g.stabilizer(p.cond("a").unwrap()), g.trivial());
        assert_eq!(g.conjugate(t, &g.trivial()), g.trivial());
        assert_eq!(g.conjugate(t, &g.whole()), g.whole());
    }

    #[test]
    fn non_normal_filter_rejected() {
        // S3 acting on three incomparable atoms below a top; a point stabilizer is not normal.
        let p = Poset::new(&["1", "x", "y", "z"], &[("x", "1"), ("y", "1"), ("z", "1")], "1").unwrap();
        let auts = all_automorphisms(&p, &Guards::default()).unwrap();
        assert_eq!(auts.len(), 6);
        let g = Arc::new(PermGroup::generate(&p, &auts, &Guards::default()).unwrap());
        let stab = g.stabilizer(p.cond("x").unwrap());
        assert!(matches!(NormalFilter::new(g.clone(), vec![stab.clone()]), Err(Error::NotNormal(_))));
        let closed = NormalFilter::normal_closure(g.clone(), vec![stab]).unwrap();
        assert_eq!(closed.core(), &g.trivial());
        assert!(closed.contains(&g.trivial()).unwrap());
    }
}
