//! Hereditarily finite sets, hash-consed.
//!
//! Structurally equal sets share one allocation, so equality is a pointer
//! comparison. The ordering is structural (rank, then members), which keeps every
//! printed or sorted result independent of interning order.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use once_cell::sync::Lazy;
use parking_lot::Mutex;

use crate::error::{Error, Result};

struct Node {
    id: u32,
    rank: u32,
    elems: Box<[HSet]>,
}

#[derive(Clone)]
pub struct HSet(Arc<Node>);

static TABLE: Lazy<Mutex<HashMap<Box<[u32]>, HSet>>> = Lazy::new(|| Mutex::new(HashMap::new()));

impl HSet {
    /// The set with the given members.
    pub fn new(elems: impl IntoIterator<Item = HSet>) -> HSet {
        let mut elems: Vec<HSet> = elems.into_iter().collect();
        elems.sort();
        elems.dedup();
        let mut key: Vec<u32> = elems.iter().map(|e| e.0.id).collect();
        key.sort_unstable();
        let mut table = TABLE.lock();
        if let Some(found) = table.get(key.as_slice()) {
            return found.clone();
        }
        let rank = elems.iter().map(|e| e.0.rank + 1).max().unwrap_or(0);
        let id = table.len() as u32;
        let set = HSet(Arc::new(Node { id, rank, elems: elems.into_boxed_slice() }));
        table.insert(key.into_boxed_slice(), set.clone());
        set
    }

    pub fn empty() -> HSet {
        HSet::new([])
    }

    pub fn singleton(x: HSet) -> HSet {
        HSet::new([x])
    }

    /// The Kuratowski pair `{{a},{a,b}}`.
    pub fn pair(a: HSet, b: HSet) -> HSet {
        HSet::new([HSet::singleton(a.clone()), HSet::new([a, b])])
    }

    /// Reads a Kuratowski pair back.
    pub fn unpair(&self) -> Option<(HSet, HSet)> {
        match self.elems() {
            [single] if single.len() == 1 => {
                let a = single.elems()[0].clone();
                Some((a.clone(), a))
            }
            [x, y] => {
                let (single, double) = if x.len() == 1 { (x, y) } else { (y, x) };
                if single.len() != 1 || double.len() != 2 {
                    return None;
                }
                let a = &single.elems()[0];
                if !double.contains(a) {
                    return None;
                }
                let b = double.elems().iter().find(|e| *e != a)?.clone();
                Some((a.clone(), b))
            }
            _ => None,
        }
    }

    /// The von Neumann ordinal `n`.
    pub fn ordinal(n: usize) -> HSet {
        let mut acc = Vec::with_capacity(n);
        for _ in 0..n {
            let next = HSet::new(acc.iter().cloned());
            acc.push(next);
        }
        HSet::new(acc)
    }

    /// The `n`-th hereditarily finite set in Ackermann's coding: `code(n)` has member
    /// `code(i)` exactly when bit `i` of `n` is set. Codes below `2^2^k` have rank at most
    /// `k + 1`, which keeps coded objects low in the name hierarchy.
    pub fn code(n: u64) -> HSet {
        HSet::new((0..64).filter(|i| n & (1 << i) != 0).map(HSet::code))
    }

    /// Inverse of [`HSet::code`] for sets that have a code.
    pub fn decode(&self) -> Option<u64> {
        let mut n = 0u64;
        for e in self.elems() {
            let i = e.decode()?;
            if i >= 64 {
                return None;
            }
            n |= 1 << i;
        }
        Some(n)
    }

    pub fn id(&self) -> u32 {
        self.0.id
    }

    pub fn rank(&self) -> usize {
        self.0.rank as usize
    }

    pub fn elems(&self) -> &[HSet] {
        &self.0.elems
    }

    pub fn len(&self) -> usize {
        self.0.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.elems.is_empty()
    }

    pub fn contains(&self, x: &HSet) -> bool {
        if x.rank() >= self.rank() {
            return false;
        }
        self.elems().binary_search(x).is_ok()
    }

    pub fn is_subset(&self, other: &HSet) -> bool {
        self.elems().iter().all(|e| other.contains(e))
    }

    pub fn union(&self, other: &HSet) -> HSet {
        HSet::new(self.elems().iter().chain(other.elems()).cloned())
    }

    /// Parses `{}`, `{{},{{}}}` and the like.
    pub fn parse(text: &str) -> Result<HSet> {
        let bytes = text.as_bytes();
        let mut pos = 0;
        let set = parse_set(bytes, &mut pos)?;
        skip_ws(bytes, &mut pos);
        if pos != bytes.len() {
            return Err(Error::Parse { offset: pos, message: "trailing input".into() });
        }
        Ok(set)
    }
}

fn skip_ws(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn parse_set(bytes: &[u8], pos: &mut usize) -> Result<HSet> {
    skip_ws(bytes, pos);
    if bytes.get(*pos) != Some(&b'{') {
        return Err(Error::Parse { offset: *pos, message: "expected `{`".into() });
    }
    *pos += 1;
    let mut elems = Vec::new();
    loop {
        skip_ws(bytes, pos);
        match bytes.get(*pos) {
            Some(b'}') => {
                *pos += 1;
                return Ok(HSet::new(elems));
            }
            Some(b',') if !elems.is_empty() => *pos += 1,
            Some(b'{') if elems.is_empty() => {}
            _ => return Err(Error::Parse { offset: *pos, message: "expected `,` or `}`".into() }),
        }
        elems.push(parse_set(bytes, pos)?);
    }
}

impl PartialEq for HSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for HSet {}

impl Hash for HSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state)
    }
}

impl Ord for HSet {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        self.0.rank.cmp(&other.0.rank).then_with(|| self.elems().cmp(other.elems()))
    }
}

impl PartialOrd for HSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for HSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.elems().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for HSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_structural() {
        let a = HSet::new([HSet::empty()]);
        let b = HSet::parse("{ {} }").unwrap();
        assert_eq!(a, b);
        assert_eq!(HSet::ordinal(2), HSet::parse("{{},{{}}}").unwrap());
        assert_eq!(HSet::new([a.clone(), a.clone()]).len(), 1);
    }

    #[test]
    fn codes_round_trip() {
        for n in 0..300 {
            assert_eq!(HSet::code(n).decode(), Some(n));
        }
        assert_eq!(HSet::code(3), HSet::ordinal(2));
        assert!(HSet::code(15).rank() <= 3);
        assert!(HSet::code(3).rank() <= 2);
    }

    #[test]
    fn pairs_round_trip() {
        let x = HSet::ordinal(1);
        let y = HSet::ordinal(3);
        assert_eq!(HSet::pair(x.clone(), y.clone()).unpair(), Some((x.clone(), y)));
        assert_eq!(HSet::pair(x.clone(), x.clone()).unpair(), Some((x.clone(), x)));
        assert_eq!(HSet::ordinal(3).unpair(), None);
    }

    #[test]
    fn parse_errors_carry_offsets() {
        assert!(matches!(HSet::parse("{{}"), Err(Error::Parse { offset: 3, .. })));
        assert!(HSet::parse("{},").is_err());
    }
}
