//! Names: finite sets of (condition, name) pairs, hash-consed.
//!
//! A name does not carry its poset; condition indices are interpreted by whichever
//! poset the caller supplies. Equality is representational. Forced equality is a
//! separate, semantic notion handled by [`crate::forcing`].

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use once_cell::sync::Lazy;
use parking_lot::Mutex;

use crate::hset::HSet;
use crate::order::{bit, Cond, CondSet, Poset};
use crate::perm::Perm;

struct Node {
    id: u32,
    rank: u32,
    conds: CondSet,
    entries: Box<[(Cond, PName)]>,
}

#[derive(Clone)]
pub struct PName(Arc<Node>);

static TABLE: Lazy<Mutex<HashMap<Box<[(u32, u32)]>, PName>>> = Lazy::new(|| Mutex::new(HashMap::new()));

static EVAL: Lazy<Mutex<HashMap<(u32, CondSet), HSet>>> = Lazy::new(|| Mutex::new(HashMap::new()));

impl PName {
    /// The name with the given entries; duplicates collapse.
    pub fn new(entries: impl IntoIterator<Item = (Cond, PName)>) -> PName {
        let mut entries: Vec<(Cond, PName)> = entries.into_iter().collect();
        entries.sort();
        entries.dedup();
        let mut key: Vec<(u32, u32)> = entries.iter().map(|(p, y)| (*p as u32, y.0.id)).collect();
        key.sort_unstable();
        let mut table = TABLE.lock();
        if let Some(found) = table.get(key.as_slice()) {
            return found.clone();
        }
        let rank = entries.iter().map(|(_, y)| y.0.rank + 1).max().unwrap_or(0);
        let conds = entries.iter().fold(0, |acc, (p, y)| acc | bit(*p) | y.0.conds);
        let id = table.len() as u32;
        let name = PName(Arc::new(Node { id, rank, conds, entries: entries.into_boxed_slice() }));
        table.insert(key.into_boxed_slice(), name.clone());
        name
    }

    pub fn empty() -> PName {
        PName::new([])
    }

    pub fn id(&self) -> u32 {
        self.0.id
    }

    pub fn rank(&self) -> usize {
        self.0.rank as usize
    }

    pub fn entries(&self) -> &[(Cond, PName)] {
        &self.0.entries
    }

    pub fn len(&self) -> usize {
        self.0.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.entries.is_empty()
    }

    /// Every condition occurring anywhere in the name.
    pub fn conditions(&self) -> CondSet {
        self.0.conds
    }

    /// The children, without duplicates, in structural order.
    pub fn children(&self) -> Vec<PName> {
        let mut out: Vec<PName> = self.entries().iter().map(|(_, y)| y.clone()).collect();
        out.sort();
        out.dedup();
        out
    }

    /// The value of the name at a filter: `{y^G : (p, y) ∈ x, p ∈ G}`.
    pub fn eval(&self, filter: CondSet) -> HSet {
        if let Some(v) = EVAL.lock().get(&(self.0.id, filter)) {
            return v.clone();
        }
        let value = HSet::new(
            self.entries().iter().filter(|(p, _)| filter & bit(*p) != 0).map(|(_, y)| y.eval(filter)),
        );
        EVAL.lock().insert((self.0.id, filter), value.clone());
        value
    }

    /// Relabels conditions throughout; `map` must cover every condition used.
    pub fn map_conditions(&self, map: &dyn Fn(Cond) -> Cond) -> PName {
        let mut memo = HashMap::new();
        self.map_with(map, &mut memo)
    }

    fn map_with(&self, map: &dyn Fn(Cond) -> Cond, memo: &mut HashMap<u32, PName>) -> PName {
        if let Some(y) = memo.get(&self.0.id) {
            return y.clone();
        }
        let out = PName::new(self.entries().iter().map(|(p, y)| (map(*p), y.map_with(map, memo))));
        memo.insert(self.0.id, out.clone());
        out
    }

    /// Renders the name with condition labels, e.g. `{(a,{})}`.
    pub fn display<'a>(&'a self, poset: &'a Poset) -> impl fmt::Display + 'a {
        Labelled { name: self, poset }
    }
}

struct Labelled<'a> {
    name: &'a PName,
    poset: &'a Poset,
}

impl fmt::Display for Labelled<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (p, y)) in self.name.entries().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            let label = if *p < self.poset.len() { self.poset.label(*p).to_string() } else { format!("#{p}") };
            write!(f, "({label},{})", y.display(self.poset))?;
        }
        f.write_str("}")
    }
}

/// `π(x) = {(π(p), π(y)) : (p, y) ∈ x}`.
pub fn apply(pi: &Perm, x: &PName) -> PName {
    let mut memo = HashMap::new();
    apply_memo(pi, x, &mut memo)
}

/// [`apply`] sharing a memo table across calls with the same permutation.
pub fn apply_memo(pi: &Perm, x: &PName, memo: &mut HashMap<u32, PName>) -> PName {
    if let Some(y) = memo.get(&x.0.id) {
        return y.clone();
    }
    let out = PName::new(x.entries().iter().map(|(p, y)| (pi.apply(*p), apply_memo(pi, y, memo))));
    memo.insert(x.0.id, out.clone());
    out
}

/// `X• = {(1, x) : x ∈ X}` over a poset with top `top`.
pub fn bullet_name(top: Cond, xs: impl IntoIterator<Item = PName>) -> PName {
    PName::new(xs.into_iter().map(|x| (top, x)))
}

/// `x̌ = {y̌ : y ∈ x}•`.
pub fn check_name(top: Cond, v: &HSet) -> PName {
    bullet_name(top, v.elems().iter().map(|y| check_name(top, y)))
}

/// The bullet Kuratowski pair `{{a}•, {a, b}•}•`.
pub fn pair_name(top: Cond, a: &PName, b: &PName) -> PName {
    bullet_name(
        top,
        [bullet_name(top, [a.clone()]), bullet_name(top, [a.clone(), b.clone()])],
    )
}

/// Encodes a name as a hereditary set: conditions become Ackermann codes and entries
/// Kuratowski pairs. Used where names themselves are objects, as in quotient conditions.
pub fn encode(x: &PName) -> HSet {
    HSet::new(x.entries().iter().map(|(p, y)| HSet::pair(HSet::code(*p as u64), encode(y))))
}

/// Inverse of [`encode`].
pub fn decode(v: &HSet) -> Option<PName> {
    let mut entries = Vec::with_capacity(v.len());
    for e in v.elems() {
        let (c, y) = e.unpair()?;
        entries.push((c.decode()? as Cond, decode(&y)?));
    }
    Some(PName::new(entries))
}

impl PartialEq for PName {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for PName {}

impl Hash for PName {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state)
    }
}

impl Ord for PName {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        self.0.rank.cmp(&other.0.rank).then_with(|| self.entries().cmp(other.entries()))
    }
}

impl PartialOrd for PName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for PName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (p, y)) in self.entries().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "(#{p},{y:?})")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{a_dot, p3, tau, u_dot};

    #[test]
    fn apply_examples() {
        let p = p3();
        let b = p.cond("b").unwrap();
        assert_eq!(apply(&tau(), &a_dot()), PName::new([(b, PName::empty())]));
        assert_eq!(apply(&Perm::identity(3), &u_dot()), u_dot());
        assert_eq!(apply(&tau(), &u_dot()), u_dot());
        assert_eq!(apply(&tau(), &a_dot()).rank(), 1);
    }

    #[test]
    fn check_and_bullet_examples() {
        let p = p3();
        let top = p.top();
        assert_eq!(check_name(top, &HSet::empty()), PName::empty());
        assert_eq!(check_name(top, &HSet::ordinal(1)), PName::new([(top, PName::empty())]));
        let both = bullet_name(top, [a_dot(), apply(&tau(), &a_dot())]);
        assert_eq!(format!("{}", both.display(&p)), "{(1,{(a,{})}),(1,{(b,{})})}");
        for n in 0..6 {
            let c = check_name(top, &HSet::ordinal(n));
            assert_eq!(apply(&tau(), &c), c);
            assert_eq!(c.eval(p.above(p.cond("a").unwrap())), HSet::ordinal(n));
        }
    }

    #[test]
    fn evaluation_at_atom_cones() {
        let p = p3();
        let ga = p.above(p.cond("a").unwrap());
        let gb = p.above(p.cond("b").unwrap());
        assert_eq!(a_dot().eval(ga), HSet::ordinal(1));
        assert_eq!(a_dot().eval(gb), HSet::empty());
        assert_eq!(u_dot().eval(gb), HSet::ordinal(1));
    }

    #[test]
    fn encoding_round_trips() {
        for x in [PName::empty(), a_dot(), u_dot(), bullet_name(0, [a_dot(), u_dot()])] {
            assert_eq!(decode(&encode(&x)), Some(x));
        }
    }
}
