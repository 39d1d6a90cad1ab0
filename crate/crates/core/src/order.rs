//! Finite forcing posets and their regular-open completions.
//!
//! Conditions are small integers indexing a label table. Sets of conditions are
//! bitmasks, which caps a poset at [`MAX_CONDITIONS`] elements.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Index of a condition within its poset.
pub type Cond = usize;

/// A set of conditions, one bit per condition.
pub type CondSet = u128;

pub const MAX_CONDITIONS: usize = 128;

#[inline]
pub fn bit(p: Cond) -> CondSet {
    1u128 << p
}

/// Iterate over the members of a condition set in increasing order.
pub fn members(mut set: CondSet) -> impl Iterator<Item = Cond> {
    std::iter::from_fn(move || {
        if set == 0 {
            None
        } else {
            let p = set.trailing_zeros() as Cond;
            set &= set - 1;
            Some(p)
        }
    })
}

/// A finite preorder with a maximum.
#[derive(Clone, PartialEq, Eq)]
pub struct Poset {
    labels: Vec<String>,
    index: HashMap<String, Cond>,
    /// `down[p]` is `{q : q <= p}`.
    down: Vec<CondSet>,
    /// `up[p]` is `{q : p <= q}`.
    up: Vec<CondSet>,
    top: Cond,
}

impl fmt::Debug for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut pairs = Vec::new();
        for p in 0..self.len() {
            for q in members(self.up[p]) {
                if p != q {
                    pairs.push(format!("{}<={}", self.labels[p], self.labels[q]));
                }
            }
        }
        f.debug_struct("Poset")
            .field("elements", &self.labels)
            .field("leq", &pairs)
            .field("top", &self.labels[self.top])
            .finish()
    }
}

impl Poset {
    /// Builds the preorder generated by `pairs` (reflexive-transitive closure).
    /// Each pair `(p, q)` asserts `p <= q`.
    pub fn new<S: AsRef<str>>(labels: &[S], pairs: &[(S, S)], top: &str) -> Result<Poset> {
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::InvalidPoset(format!("duplicate label `{l}`")));
            }
        }
        let lookup = |s: &str| index.get(s).copied().ok_or_else(|| Error::UnknownCondition(s.to_string()));
        let mut edges = Vec::with_capacity(pairs.len());
        for (p, q) in pairs {
            edges.push((lookup(p.as_ref())?, lookup(q.as_ref())?));
        }
        let top = lookup(top)?;
        Poset::from_edges(labels, &edges, top)
    }

    /// Builds the preorder generated by index pairs `(p, q)` meaning `p <= q`.
    pub fn from_edges(labels: Vec<String>, edges: &[(Cond, Cond)], top: Cond) -> Result<Poset> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidPoset("no elements".into()));
        }
        if n > MAX_CONDITIONS {
            return Err(Error::GuardExceeded {
                what: "poset size",
                size: n as u128,
                limit: MAX_CONDITIONS as u128,
            });
        }
        if top >= n {
            return Err(Error::UnknownCondition(top.to_string()));
        }
        let mut up: Vec<CondSet> = (0..n).map(bit).collect();
        for &(p, q) in edges {
            if p >= n || q >= n {
                return Err(Error::UnknownCondition(p.max(q).to_string()));
            }
            up[p] |= bit(q);
        }
        // Warshall on bit rows.
        for k in 0..n {
            for p in 0..n {
                if up[p] & bit(k) != 0 {
                    up[p] |= up[k];
                }
            }
        }
        let mut down = vec![0; n];
        for p in 0..n {
            for q in members(up[p]) {
                down[q] |= bit(p);
            }
        }
        let all = full(n);
        if down[top] != all {
            return Err(Error::InvalidPoset(format!("`{}` is not a maximum", labels[top])));
        }
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Ok(Poset { labels, index, down, up, top })
    }

    /// The one-point poset.
    pub fn point() -> Poset {
        Poset::from_edges(vec!["1".into()], &[], 0).expect("one point is a poset")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn top(&self) -> Cond {
        self.top
    }

    pub fn all(&self) -> CondSet {
        full(self.len())
    }

    pub fn label(&self, p: Cond) -> &str {
        &self.labels[p]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cond(&self, label: &str) -> Result<Cond> {
        self.index.get(label).copied().ok_or_else(|| Error::UnknownCondition(label.to_string()))
    }

    pub fn conds(&self) -> std::ops::Range<Cond> {
        0..self.len()
    }

    fn check(&self, p: Cond) -> Result<()> {
        if p < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownCondition(p.to_string()))
        }
    }

    /// `p <= q`: `p` extends `q`.
    #[inline]
    pub fn leq(&self, p: Cond, q: Cond) -> bool {
        self.down[q] & bit(p) != 0
    }

    #[inline]
    pub fn below(&self, p: Cond) -> CondSet {
        self.down[p]
    }

    #[inline]
    pub fn above(&self, p: Cond) -> CondSet {
        self.up[p]
    }

    /// Downward closure of a set.
    pub fn down_closure(&self, set: CondSet) -> CondSet {
        members(set).fold(0, |acc, p| acc | self.down[p])
    }

    /// Upward closure of a set.
    pub fn up_closure(&self, set: CondSet) -> CondSet {
        members(set).fold(0, |acc, p| acc | self.up[p])
    }

    #[inline]
    pub fn compat(&self, p: Cond, q: Cond) -> bool {
        self.down[p] & self.down[q] != 0
    }

    /// `p` and `q` have a common extension.
    pub fn compatible(&self, p: Cond, q: Cond) -> Result<bool> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.compat(p, q))
    }

    /// Every condition has an extension in `set`.
    pub fn is_dense(&self, set: CondSet) -> bool {
        self.conds().all(|p| self.down[p] & set != 0)
    }

    /// Every condition below `p` has an extension in `set`.
    pub fn is_dense_below(&self, p: Cond, set: CondSet) -> bool {
        self.is_dense_in(self.down[p], set)
    }

    /// Every member of the region has an extension in `set`.
    pub fn is_dense_in(&self, region: CondSet, set: CondSet) -> bool {
        members(region).all(|q| self.down[q] & set != 0)
    }

    /// Every condition is compatible with a member of `set`.
    pub fn is_predense(&self, set: CondSet) -> bool {
        self.conds().all(|p| members(set).any(|q| self.compat(p, q)))
    }

    /// Conditions with nothing strictly below them.
    pub fn minimal(&self) -> CondSet {
        self.conds()
            .filter(|&p| members(self.down[p]).all(|q| self.leq(p, q)))
            .fold(0, |acc, p| acc | bit(p))
    }

    /// One representative for each class of equivalent minimal conditions.
    pub fn atoms(&self) -> Vec<Cond> {
        let mut seen = 0;
        let mut out = Vec::new();
        for m in members(self.minimal()) {
            if seen & bit(m) == 0 {
                seen |= self.down[m];
                out.push(m);
            }
        }
        out
    }

    /// The generic filters: cones above the minimal conditions, one per class.
    pub fn generics(&self) -> Vec<CondSet> {
        self.atoms().into_iter().map(|m| self.up[m]).collect()
    }

    /// A nonempty, upward closed, directed set.
    pub fn is_filter(&self, set: CondSet) -> bool {
        if set == 0 || self.up_closure(set) != set {
            return false;
        }
        members(set).all(|p| members(set).all(|q| self.down[p] & self.down[q] & set != 0))
    }

    /// The order restricted to `set`, relabelled in increasing index order.
    pub fn restrict(&self, set: CondSet, top: Cond) -> Result<(Poset, Vec<Cond>)> {
        let keep: Vec<Cond> = members(set).collect();
        let pos: HashMap<Cond, Cond> = keep.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let labels = keep.iter().map(|&p| self.labels[p].clone()).collect();
        let mut edges = Vec::new();
        for &p in &keep {
            for &q in &keep {
                if p != q && self.leq(p, q) {
                    edges.push((pos[&p], pos[&q]));
                }
            }
        }
        let top = *pos.get(&top).ok_or_else(|| Error::UnknownCondition(top.to_string()))?;
        Ok((Poset::from_edges(labels, &edges, top)?, keep))
    }

    /// Builds a poset from a relation given as a predicate; used by the derived constructions.
    pub fn from_fn(labels: Vec<String>, top: Cond, leq: impl Fn(Cond, Cond) -> bool) -> Result<Poset> {
        let n = labels.len();
        let mut edges = Vec::new();
        for p in 0..n {
            for q in 0..n {
                if p != q && leq(p, q) {
                    edges.push((p, q));
                }
            }
        }
        let poset = Poset::from_edges(labels, &edges, top)?;
        for p in 0..n {
            for q in 0..n {
                if poset.leq(p, q) != (p == q || leq(p, q)) {
                    return Err(Error::InvalidPoset("relation is not transitive".into()));
                }
            }
        }
        Ok(poset)
    }
}

fn full(n: usize) -> CondSet {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// Disjoint union of tagged copies with a fresh top `1` above everything.
/// Copy `i` of condition `p` is labelled `i:p`.
pub fn lottery_sum(parts: &[&Poset]) -> Result<Poset> {
    if parts.is_empty() {
        return Err(Error::InvalidPoset("lottery sum of no posets".into()));
    }
    let mut labels = vec!["1".to_string()];
    let mut edges = Vec::new();
    for (i, part) in parts.iter().enumerate() {
        let base = labels.len();
        labels.extend(part.labels().iter().map(|l| format!("{i}:{l}")));
        for p in part.conds() {
            edges.push((base + p, 0));
            for q in members(part.above(p)) {
                if p != q {
                    edges.push((base + p, base + q));
                }
            }
        }
    }
    Poset::from_edges(labels, &edges, 0)
}

/// The regular open subsets of a poset under the downward topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanAlgebra {
    /// Regular open sets, ordered by size then bit pattern; index 0 is the empty set.
    elements: Vec<CondSet>,
    index: HashMap<CondSet, usize>,
    join: Vec<Vec<usize>>,
    meet: Vec<Vec<usize>>,
    complement: Vec<usize>,
    /// Image of each source condition.
    embedding: Vec<usize>,
    /// Source poset, kept for labelling.
    source: Poset,
}

/// Interior of `set`: conditions whose whole cone below lies in `set`.
pub fn interior(poset: &Poset, set: CondSet) -> CondSet {
    poset.conds().filter(|&p| poset.below(p) & !set == 0).fold(0, |acc, p| acc | bit(p))
}

/// Closure of `set`: conditions whose cone below meets `set`.
pub fn closure(poset: &Poset, set: CondSet) -> CondSet {
    poset.conds().filter(|&p| poset.below(p) & set != 0).fold(0, |acc, p| acc | bit(p))
}

/// `int(cl(set))`.
pub fn regularize(poset: &Poset, set: CondSet) -> CondSet {
    interior(poset, closure(poset, set))
}

impl BooleanAlgebra {
    /// Every regular open set is determined by the minimal conditions it contains, so the
    /// algebra is enumerated from subsets of atom classes.
    pub fn of(poset: &Poset) -> Result<BooleanAlgebra> {
        let atoms = poset.atoms();
        if atoms.len() > 20 {
            return Err(Error::GuardExceeded {
                what: "atom count",
                size: atoms.len() as u128,
                limit: 20,
            });
        }
        let mut elements = Vec::with_capacity(1 << atoms.len());
        for choice in 0u64..(1 << atoms.len()) {
            let mut base = 0;
            for (i, &m) in atoms.iter().enumerate() {
                if choice & (1 << i) != 0 {
                    base |= poset.below(m);
                }
            }
            elements.push(regularize(poset, base));
        }
        elements.sort_by_key(|&u| (u.count_ones(), u));
        elements.dedup();
        let index: HashMap<CondSet, usize> = elements.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let n = elements.len();
        let all = poset.all();
        let mut join = vec![vec![0; n]; n];
        let mut meet = vec![vec![0; n]; n];
        for i in 0..n {
            for j in 0..n {
                join[i][j] = index[&regularize(poset, elements[i] | elements[j])];
                meet[i][j] = index[&(elements[i] & elements[j])];
            }
        }
        let complement = elements.iter().map(|&u| index[&interior(poset, all & !u)]).collect();
        let embedding = poset.conds().map(|p| index[&regularize(poset, poset.below(p))]).collect();
        Ok(BooleanAlgebra { elements, index, join, meet, complement, embedding, source: poset.clone() })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn elements(&self) -> &[CondSet] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> CondSet {
        self.elements[i]
    }

    pub fn index_of(&self, set: CondSet) -> Option<usize> {
        self.index.get(&set).copied()
    }

    pub fn zero(&self) -> usize {
        0
    }

    pub fn one(&self) -> usize {
        self.len() - 1
    }

    pub fn join(&self, i: usize, j: usize) -> usize {
        self.join[i][j]
    }

    pub fn meet(&self, i: usize, j: usize) -> usize {
        self.meet[i][j]
    }

    pub fn complement(&self, i: usize) -> usize {
        self.complement[i]
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.elements[i] & !self.elements[j] == 0
    }

    pub fn embedding(&self) -> &[usize] {
        &self.embedding
    }

    pub fn source(&self) -> &Poset {
        &self.source
    }

    /// Label of an element: its maximal members joined with `+`, or `0` for the empty set.
    pub fn label(&self, i: usize) -> String {
        let u = self.elements[i];
        if u == 0 {
            return "0".into();
        }
        let p = &self.source;
        if u == p.all() {
            return p.label(p.top()).to_string();
        }
        // Maximal members, keeping the first of each class of equivalent ones.
        let maximal: Vec<&str> = members(u)
            .filter(|&x| members(u).all(|y| !p.leq(x, y) || (p.leq(y, x) && y >= x)))
            .map(|x| p.label(x))
            .collect();
        maximal.join("+")
    }

    /// The nonzero elements ordered by inclusion, as a forcing poset. Element `i` of the
    /// algebra becomes condition `i - 1`.
    pub fn forcing_poset(&self) -> Poset {
        let labels = (1..self.len()).map(|i| self.label(i)).collect();
        Poset::from_fn(labels, self.len() - 2, |p, q| self.leq(p + 1, q + 1))
            .expect("inclusion on regular open sets is a partial order with maximum")
    }

    /// The action of a source automorphism on the algebra.
    pub fn lift(&self, perm: &[Cond]) -> Vec<usize> {
        self.elements
            .iter()
            .map(|&u| {
                let image = members(u).fold(0, |acc, p| acc | bit(perm[p]));
                self.index[&image]
            })
            .collect()
    }
}

/// The regular-open completion of `poset` and the canonical embedding into it.
pub fn boolean_completion(poset: &Poset) -> Result<(BooleanAlgebra, Vec<usize>)> {
    let algebra = BooleanAlgebra::of(poset)?;
    let embedding = algebra.embedding.clone();
    Ok((algebra, embedding))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::p3;

    fn set(p: &Poset, labels: &[&str]) -> CondSet {
        labels.iter().fold(0, |acc, l| acc | bit(p.cond(l).unwrap()))
    }

    #[test]
    fn compatibility_on_p3() {
        let p = p3();
        let (one, a, b) = (p.cond("1").unwrap(), p.cond("a").unwrap(), p.cond("b").unwrap());
        assert!(!p.compatible(a, b).unwrap());
        assert!(p.compatible(a, one).unwrap());
        assert!(p.compatible(a, a).unwrap());
        assert!(p.compatible(a, 7).is_err());
    }

    #[test]
    fn density_on_p3() {
        let p = p3();
        assert!(p.is_dense(set(&p, &["a", "b"])));
        assert!(!p.is_dense(set(&p, &["1"])));
        assert!(p.is_predense(set(&p, &["1"])));
        assert!(!p.is_predense(set(&p, &["a"])));
    }

    #[test]
    fn lottery_sizes() {
        let p = p3();
        assert_eq!(lottery_sum(&[&p, &p]).unwrap().len(), 7);
        assert_eq!(lottery_sum(&[&p]).unwrap().len(), 4);
        let chain = lottery_sum(&[&Poset::point()]).unwrap();
        assert_eq!(chain.len(), 2);
        assert!(chain.leq(1, 0) && !chain.leq(0, 1));
        assert!(lottery_sum(&[]).is_err());
    }

    #[test]
    fn top_must_be_maximum() {
        let err = Poset::new(&["1", "a"], &[], "1").unwrap_err();
        assert!(matches!(err, Error::InvalidPoset(_)));
    }

    #[test]
    fn completion_sizes() {
        let p = p3();
        let (b, emb) = boolean_completion(&p).unwrap();
        assert_eq!(b.len(), 4);
        let a = p.cond("a").unwrap();
        assert_eq!(b.element(emb[a]), p.below(a));
        assert_eq!(boolean_completion(&Poset::point()).unwrap().0.len(), 2);
        // Four minimal conditions in the lottery sum of two copies of P3.
        let l2 = lottery_sum(&[&p, &p]).unwrap();
        assert_eq!(boolean_completion(&l2).unwrap().0.len(), 16);
    }

    #[test]
    fn completion_poset_of_p3_is_p3() {
        let (b, _) = boolean_completion(&p3()).unwrap();
        let q = b.forcing_poset();
        assert_eq!(q.len(), 3);
        assert_eq!(q.label(q.top()), "1");
        assert_eq!(q.atoms().len(), 2);
    }
}
