//! Complete subsystems against `H`-reductions, initial segments of iterations, and
//! the passage from symmetric extensions to full generic extensions.

use std::collections::BTreeSet;

use proptest::prelude::*;
use symext::fixtures::{p3, sfree, ssym, striv};
use symext::forcing::enumerate_symmetric_generics;
use symext::iteration::{check_stage, finite_iteration, Ideal};
use symext::quotient::{every_condition_reduces, is_complete_subsystem, is_subforcing, is_symmetrically_complete};
use symext::system::sets_of_rank;
use symext::{Cond, Guards, HSet, Poset, SymSystem};

/// `P3` (indices 0, 1, 2) extended by nodes given as lists of parents.
fn extend_p3(extra: &[Vec<Cond>]) -> Option<Poset> {
    let mut labels: Vec<String> = ["1", "a", "b"].iter().map(|s| s.to_string()).collect();
    let mut edges = vec![(1, 0), (2, 0)];
    for (i, parents) in extra.iter().enumerate() {
        let me = 3 + i;
        labels.push(format!("n{i}"));
        for &p in parents {
            if p >= me {
                return None;
            }
            edges.push((me, p));
        }
        if parents.is_empty() {
            edges.push((me, 0));
        }
    }
    Poset::from_edges(labels, &edges, 0).ok()
}

fn systems() -> Vec<(&'static str, SymSystem)> {
    vec![("Striv", striv()), ("Ssym", ssym()), ("Sfree", sfree())]
}

/// Every way of hanging up to three new nodes below existing ones, each with one or
/// two parents. Only genuine subforcings are kept.
fn subforcing_fixtures() -> Vec<Poset> {
    let mut shapes: Vec<Vec<Vec<Cond>>> = vec![vec![]];
    for depth in 0..3 {
        let n = 3 + depth;
        let mut parent_choices: Vec<Vec<Cond>> = (0..n).map(|p| vec![p]).collect();
        for p in 0..n {
            for q in p + 1..n {
                parent_choices.push(vec![p, q]);
            }
        }
        let next: Vec<Vec<Vec<Cond>>> = shapes
            .iter()
            .filter(|s| s.len() == depth)
            .flat_map(|s| parent_choices.iter().map(move |c| [s.clone(), vec![c.clone()]].concat()))
            .collect();
        shapes.extend(next);
    }
    let id = [0, 1, 2];
    shapes.iter().filter_map(|s| extend_p3(s)).filter(|q| is_subforcing(&p3(), q, &id)).collect()
}

#[test]
fn reductions_characterize_completeness() {
    let fixtures = subforcing_fixtures();
    assert!(fixtures.len() > 100);
    let mut verdicts = BTreeSet::new();
    for q in &fixtures {
        for (name, s) in systems() {
            let complete = is_symmetrically_complete(&s, q, &[0, 1, 2]).unwrap();
            let reduces = every_condition_reduces(&s, q, &[0, 1, 2]).unwrap();
            assert_eq!(complete, reduces, "{name} inside {q:?}");
            verdicts.insert(complete);
        }
    }
    // Both answers occur, so the equivalence is not vacuous.
    assert_eq!(verdicts.len(), 2);
}

#[test]
fn ten_element_fixture() {
    // Seven new nodes: chains below `a` and `b`, and one node directly below the top.
    let q = extend_p3(&[vec![1], vec![3], vec![2], vec![5], vec![4], vec![6], vec![0]]).unwrap();
    assert_eq!(q.len(), 10);
    assert!(is_subforcing(&p3(), &q, &[0, 1, 2]));
    for (_, s) in systems() {
        let complete = is_symmetrically_complete(&s, &q, &[0, 1, 2]).unwrap();
        assert_eq!(complete, every_condition_reduces(&s, &q, &[0, 1, 2]).unwrap());
        // The last node is incompatible with both atoms.
        assert!(!complete);
    }
    let q = extend_p3(&[vec![1], vec![3], vec![2], vec![5], vec![4], vec![6], vec![2]]).unwrap();
    for (_, s) in systems() {
        assert!(is_symmetrically_complete(&s, &q, &[0, 1, 2]).unwrap());
        assert!(every_condition_reduces(&s, &q, &[0, 1, 2]).unwrap());
    }
}

fn parent_lists() -> impl Strategy<Value = Vec<Vec<Cond>>> {
    prop::collection::vec(prop::collection::vec(0usize..9, 1..3), 0..7).prop_map(|nodes| {
        nodes
            .into_iter()
            .enumerate()
            .map(|(i, ps)| ps.into_iter().map(|p| p % (3 + i)).collect::<BTreeSet<_>>().into_iter().collect())
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reductions_match_completeness_on_random_extensions(extra in parent_lists()) {
        let q = extend_p3(&extra).unwrap();
        prop_assume!(is_subforcing(&p3(), &q, &[0, 1, 2]));
        for (_, s) in systems() {
            prop_assert_eq!(
                is_symmetrically_complete(&s, &q, &[0, 1, 2]).unwrap(),
                every_condition_reduces(&s, &q, &[0, 1, 2]).unwrap()
            );
        }
    }
}

#[test]
fn initial_segments_are_complete_subsystems() {
    let c2 = SymSystem::from_generators(
        Poset::new(&["1", "c"], &[("c", "1")], "1").unwrap(),
        &[],
        &[vec![]],
        Guards::default(),
    )
    .unwrap();
    let stages = [check_stage(ssym()), check_stage(c2), check_stage(striv())];
    let guards = Guards { poset: 128, ..Guards::default() };
    let it = finite_iteration(&stages, &Ideal::all_subsets(3).unwrap(), guards).unwrap();
    for gamma in 0..=3 {
        for alpha in 0..=gamma {
            let emb: Vec<Cond> = it.system(alpha).poset().conds().map(|c| it.pad_condition(alpha, gamma, c)).collect();
            assert!(
                is_complete_subsystem(it.system(alpha), it.system(gamma), &emb).unwrap(),
                "S_{alpha} inside S_{gamma}"
            );
        }
    }
}

#[test]
fn symmetric_models_are_full_generic_models() {
    // For every symmetric generic there is a generic for the bare poset with the same
    // bounded model: at finite scale both are the sets of small rank.
    for (_, s) in systems() {
        let bare = SymSystem::from_generators((**s.poset()).clone(), &[], &[vec![]], Guards::default()).unwrap();
        for k in 0..=2 {
            let small: BTreeSet<HSet> = sets_of_rank(k).into_iter().collect();
            for g in enumerate_symmetric_generics(&s) {
                let Some(i) = s.atoms().iter().position(|&m| m == g.atom) else { continue };
                let model = s.model_at(i, k).unwrap();
                assert_eq!(model, small);
                assert!((0..bare.generics().len()).any(|h| bare.model_at(h, k).unwrap() == model));
            }
        }
    }
}
