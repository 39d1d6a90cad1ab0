//! Search results for equivalence behave like an equivalence relation, and every
//! witness the search hands back survives validation, inverted and composed.

use proptest::prelude::*;
use symext::equivalence::{default_formulas, find_equivalence, validate_witness, NameClass};
use symext::fixtures::{l2_system, l2_trivial, sfree, ssym, striv};
use symext::SymSystem;

fn systems() -> Vec<SymSystem> {
    vec![striv(), ssym(), sfree(), l2_system(), l2_trivial()]
}

fn class(i: usize) -> NameClass {
    [NameClass::Hs, NameClass::N][i]
}

#[test]
fn reflexive_on_every_fixture() {
    let f = default_formulas();
    for s in systems() {
        for c in 0..2 {
            let w = find_equivalence(&s, &s, class(c), 2).unwrap().expect("reflexive");
            assert!(validate_witness(&s, &s, &w, &f).unwrap().is_valid());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetric_with_valid_inverse(a in 0usize..5, b in 0usize..5, c in 0usize..2) {
        let all = systems();
        let (s, t) = (&all[a], &all[b]);
        let there = find_equivalence(s, t, class(c), 2).unwrap();
        let back = find_equivalence(t, s, class(c), 2).unwrap();
        prop_assert_eq!(there.is_some(), back.is_some());
        if let Some(w) = there {
            let f = default_formulas();
            prop_assert!(validate_witness(s, t, &w, &f).unwrap().is_valid());
            prop_assert!(validate_witness(t, s, &w.inverse(), &f).unwrap().is_valid());
        }
    }

    #[test]
    fn transitive_with_valid_composite(a in 0usize..5, b in 0usize..5, d in 0usize..5, c in 0usize..2) {
        let all = systems();
        let (s, t, u) = (&all[a], &all[b], &all[d]);
        let first = find_equivalence(s, t, class(c), 2).unwrap();
        let second = find_equivalence(t, u, class(c), 2).unwrap();
        if let (Some(x), Some(y)) = (first, second) {
            let direct = find_equivalence(s, u, class(c), 2).unwrap();
            prop_assert!(direct.is_some());
            let composite = x.then(&y);
            prop_assert!(validate_witness(s, u, &composite, &default_formulas()).unwrap().is_valid());
        }
    }
}
