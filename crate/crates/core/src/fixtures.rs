//! Small standard systems used throughout the tests, benches and example corpus.
//!
//! `P3` is `{1, a, b}` with `a, b < 1` incompatible, `τ` swaps `a` and `b`, and `L2` is
//! the lottery sum of two copies of `P3` with the copy-swapping involution.

use std::sync::Arc;

use crate::guard::Guards;
use crate::name::PName;
use crate::order::{lottery_sum, Poset};
use crate::perm::{NormalFilter, Perm, PermGroup};
use crate::system::SymSystem;

pub fn p3() -> Poset {
    Poset::new(&["1", "a", "b"], &[("a", "1"), ("b", "1")], "1").expect("P3 is a poset")
}

/// The swap of `a` and `b` in `P3`.
pub fn tau() -> Perm {
    Perm::from_images(vec![0, 2, 1]).expect("a permutation")
}

pub fn g2() -> PermGroup {
    PermGroup::generate(&p3(), &[tau()], &Guards::default()).expect("τ is an automorphism")
}

/// `(P3, {id}, {{id}})`: every name is symmetric.
pub fn striv() -> SymSystem {
    SymSystem::from_generators(p3(), &[], &[vec![]], Guards::default()).expect("valid system")
}

/// `(P3, {id, τ}, {G2})`: only swap-invariant names are symmetric.
pub fn ssym() -> SymSystem {
    SymSystem::from_generators(p3(), &[tau()], &[vec![tau()]], Guards::default()).expect("valid system")
}

/// `(P3, {id, τ}, {H : H ≤ G2})`: the full group acting with the trivial-subgroup filter.
pub fn sfree() -> SymSystem {
    SymSystem::from_generators(p3(), &[tau()], &[vec![]], Guards::default()).expect("valid system")
}

pub fn l2() -> Poset {
    let p = p3();
    lottery_sum(&[&p, &p]).expect("nonempty")
}

/// `(i, p) ↦ (1 - i, p)` on `L2`.
pub fn tag_swap() -> Perm {
    let l = l2();
    let images = l
        .conds()
        .map(|c| {
            let label = l.label(c);
            match label.split_once(':') {
                Some((tag, rest)) => {
                    let other = if tag == "0" { "1" } else { "0" };
                    l.cond(&format!("{other}:{rest}")).expect("copy exists")
                }
                None => c,
            }
        })
        .collect();
    Perm::from_images(images).expect("a permutation")
}

/// `(L2, {id, π}, {{id, π}})`.
pub fn l2_system() -> SymSystem {
    let swap = tag_swap();
    SymSystem::from_generators(l2(), &[swap.clone()], &[vec![swap]], Guards::default()).expect("valid system")
}

/// `(L2, {id}, {{id}})`.
pub fn l2_trivial() -> SymSystem {
    SymSystem::from_generators(l2(), &[], &[vec![]], Guards::default()).expect("valid system")
}

/// The system over the one-point poset.
pub fn point_system() -> SymSystem {
    let poset = Arc::new(Poset::point());
    let group = Arc::new(PermGroup::trivial_group(1));
    let filter = NormalFilter::new(group.clone(), vec![group.whole()]).expect("normal");
    SymSystem::new(poset, filter, Guards::default()).expect("valid system")
}

/// `0̇ = ∅`.
pub fn zero_dot() -> PName {
    PName::empty()
}

/// `ȧ = {(a, 0̇)}` over `P3`.
pub fn a_dot() -> PName {
    PName::new([(1, PName::empty())])
}

/// `u̇ = {(a, 0̇), (b, 0̇)}` over `P3`.
pub fn u_dot() -> PName {
    PName::new([(1, PName::empty()), (2, PName::empty())])
}

/// The binary tree of height two: `1 > 0, 1` and `i > i0, i1`.
pub fn tree7() -> Poset {
    Poset::new(
        &["1", "0", "1'", "00", "01", "10", "11"],
        &[("0", "1"), ("1'", "1"), ("00", "0"), ("01", "0"), ("10", "1'"), ("11", "1'")],
        "1",
    )
    .expect("a tree is a poset")
}

/// `tree7` with all eight automorphisms and the filter of all subgroups.
pub fn tree7_system() -> SymSystem {
    let p = tree7();
    let swap = |pairs: &[(&str, &str)]| crate::perm::automorphism_from_labels(&p, pairs).expect("an automorphism");
    let top = swap(&[("0", "1'"), ("1'", "0"), ("00", "10"), ("10", "00"), ("01", "11"), ("11", "01")]);
    let left = swap(&[("00", "01"), ("01", "00")]);
    SymSystem::from_generators(p.clone(), &[top, left], &[vec![]], Guards::default()).expect("valid system")
}
