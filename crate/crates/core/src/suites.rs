//! The verification suites. Each one mechanizes a single result over the standard
//! fixtures by exhaustive comparison with an independent oracle, and reports how many
//! checks it made and which failed.
//!
//! Name inventories are bounded: the full rank-2 hierarchy over `P3` alone has `2^24`
//! names, so each suite uses every name of rank at most 1 together with a family of
//! rank-2 names described at its inventory function.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::time::Duration;

use itertools::Itertools;

use crate::completion::completion;
use crate::equivalence::{
    bounded_names, default_formulas, find_equivalence, lottery_system, lottery_witness, validate_witness, NameClass,
};
use crate::error::{Error, Result};
use crate::fixtures::{l2_system, p3, sfree, ssym, striv, tree7, tree7_system};
use crate::forcing::{enumerate_generics, enumerate_symmetric_generics, Forcer, GenericFilter};
use crate::formula::{parse, Rel};
use crate::guard::Guards;
use crate::hset::HSet;
use crate::iteration::{
    bracket, compose_generic, factor_generic, j_map, open_bracket, product, reduced_embedding, reduced_iteration,
    two_step, unbracket, NameWitness, SystemName, TwoStep,
};
use crate::name::{apply, check_name, PName};
use crate::order::{bit, Cond, CondSet, Poset};
use crate::quotient::{
    canonical_quotient_generic, every_condition_reduces, full_quotient_report, i_map, identity_embedding,
    is_symmetrically_complete, meets_every_dense, quotient_forcing, quotient_iteration, quotient_system,
    is_subforcing, PsiEntry, RespectBasis,
};
use crate::symmetric::{enumerate_hs, is_hs, mixing_witness, mixture_name};
use crate::system::{sets_of_rank, SymSystem};

/// Number, short title and time budget of every suite run in-process.
pub const SUITES: [(usize, &str, u64); 8] = [
    (1, "forcing theorem", 60),
    (2, "symmetry lemma", 30),
    (3, "two-step algebra", 60),
    (4, "factorization", 120),
    (5, "product and reduced iteration", 120),
    (6, "quotients", 180),
    (7, "completion", 120),
    (8, "lottery example", 60),
];

/// Result of one suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteOutcome {
    pub number: usize,
    pub title: &'static str,
    pub checks: u64,
    pub failed: u64,
    /// The first few failures.
    pub failures: Vec<String>,
}

impl SuiteOutcome {
    fn new(number: usize) -> SuiteOutcome {
        let title = SUITES.iter().find(|s| s.0 == number).map_or("", |s| s.1);
        SuiteOutcome { number, title, checks: 0, failed: 0, failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0 && self.checks > 0
    }

    pub fn budget(&self) -> Duration {
        Duration::from_secs(SUITES.iter().find(|s| s.0 == self.number).map_or(0, |s| s.2))
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < 8 {
                self.failures.push(what());
            }
        }
    }

    /// Records an error as a failed check instead of aborting the suite.
    fn attempt<T>(&mut self, r: Result<T>, what: impl Display) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(false, || format!("{what}: {e}"));
                None
            }
        }
    }
}

/// Runs suite `n` (1 to 8).
pub fn run_suite(n: usize) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new(n);
    match n {
        1 => forcing_theorem(&mut out),
        2 => symmetry_lemma(&mut out),
        3 => two_step_algebra(&mut out),
        4 => factorization(&mut out),
        5 => product_and_reduced(&mut out),
        6 => quotients(&mut out),
        7 => completions(&mut out),
        8 => lottery(&mut out),
        _ => return Err(Error::Precondition(format!("no suite numbered {n}"))),
    }
    Ok(out)
}

/// Every name of rank at most 1: all subsets of `P × {∅}`.
pub fn rank_one_names(poset: &Poset) -> Vec<PName> {
    let n = poset.len();
    (0u64..1 << n)
        .map(|mask| PName::new((0..n).filter(|&c| mask & (1 << c) != 0).map(|c| (c, PName::empty()))))
        .collect()
}

fn conds_of(mask: u64, n: usize) -> impl Iterator<Item = Cond> {
    (0..n).filter(move |&c| mask & (1 << c) != 0)
}

/// Rank-1 names, and rank-2 names with at most `children` distinct children each paired
/// with an arbitrary nonempty set of conditions. Children range over `pool`.
pub fn forcing_inventory(poset: &Poset, pool: &[PName], children: usize) -> Vec<PName> {
    let n = poset.len();
    let mut out: BTreeSet<PName> = rank_one_names(poset).into_iter().collect();
    for r in 1..=children {
        for kids in pool.iter().combinations(r) {
            let mut masks = vec![1u64; r];
            loop {
                out.insert(PName::new(
                    kids.iter().zip(&masks).flat_map(|(k, &m)| conds_of(m, n).map(move |c| (c, (*k).clone()))),
                ));
                let mut i = 0;
                while i < r {
                    masks[i] += 1;
                    if masks[i] < 1 << n {
                        break;
                    }
                    masks[i] = 1;
                    i += 1;
                }
                if i == r {
                    break;
                }
            }
        }
    }
    out.into_iter().collect()
}

fn holds(rel: Rel, a: &HSet, b: &HSet) -> bool {
    match rel {
        Rel::In => b.contains(a),
        Rel::Eq => a == b,
        Rel::Sub => a.is_subset(b),
    }
}

const RELS: [Rel; 3] = [Rel::In, Rel::Eq, Rel::Sub];

fn forcing_theorem(out: &mut SuiteOutcome) {
    let p = p3();
    let t = tree7();
    let small: Vec<PName> = rank_one_names(&t).into_iter().filter(|x| x.len() <= 1).collect();
    let cases = [
        ("P3", p.clone(), forcing_inventory(&p, &rank_one_names(&p), 2)),
        ("T7", t.clone(), forcing_inventory(&t, &small, 1)),
    ];
    for (label, poset, names) in &cases {
        let generics: Vec<CondSet> = enumerate_generics(poset).into_iter().map(|g| g.conds).collect();
        let values: Vec<Vec<HSet>> = names.iter().map(|x| generics.iter().map(|&g| x.eval(g)).collect()).collect();
        for (i, x) in names.iter().enumerate() {
            let mut forcer = Forcer::new(poset);
            for (j, y) in names.iter().enumerate() {
                for rel in RELS {
                    // p forces the relation iff no generic through p violates it.
                    let mut bad: CondSet = 0;
                    for (g, &gen) in generics.iter().enumerate() {
                        if !holds(rel, &values[i][g], &values[j][g]) {
                            bad |= gen;
                        }
                    }
                    let semantic = poset.all() & !bad;
                    let recursive = forcer.forcing_set(rel, x, y);
                    out.check(recursive == semantic, || {
                        format!("{label}: {rel:?} between names {i} and {j}: {recursive:b} vs {semantic:b}")
                    });
                }
            }
        }
    }
}

/// Rank-1 names and rank-2 names with one entry whose child has at most one entry.
fn thin_inventory(poset: &Poset) -> Vec<PName> {
    let mut names = rank_one_names(poset);
    let kids: Vec<PName> = names.iter().filter(|x| x.len() <= 1).cloned().collect();
    for c in poset.conds() {
        for k in &kids {
            names.push(PName::new([(c, k.clone())]));
        }
    }
    names
}

fn symmetry_lemma(out: &mut SuiteOutcome) {
    let wide = bounded_names(&p3(), 2, 2, &Guards::default()).expect("within guards");
    let fixtures: Vec<(&str, SymSystem, Vec<PName>)> = vec![
        ("Striv", striv(), wide.clone()),
        ("Ssym", ssym(), wide.clone()),
        ("Sfree", sfree(), wide),
        ("L2", l2_system(), thin_inventory(l2_system().poset())),
        ("T7", tree7_system(), thin_inventory(&tree7())),
    ];
    for (label, s, names) in &fixtures {
        let poset = s.poset();
        let group = s.group();
        for pi in 0..group.order() {
            let perm = group.element(pi);
            let moved: Vec<PName> = names.iter().map(|x| apply(perm, x)).collect();
            let mut forcer = Forcer::new(poset);
            for (i, x) in names.iter().enumerate() {
                for (j, y) in names.iter().enumerate() {
                    for rel in RELS {
                        let before = perm.apply_set(forcer.forcing_set(rel, x, y));
                        let after = forcer.forcing_set(rel, &moved[i], &moved[j]);
                        out.check(before == after, || format!("{label}: element {pi}, {rel:?} on names {i}, {j}"));
                    }
                }
            }
        }
    }
}

fn two_step_fixtures() -> Vec<(&'static str, SymSystem, SymSystem)> {
    vec![("Striv*Striv", striv(), striv()), ("Ssym*Ssym", ssym(), ssym()), ("Striv*Ssym", striv(), ssym())]
}

fn two_step_algebra(out: &mut SuiteOutcome) {
    for (label, a, b) in two_step_fixtures().into_iter().take(2) {
        let Some(t) = out.attempt(two_step(&a, &SystemName::check(&a, &b)), label) else { continue };
        let n = t.system().poset().len();
        let act = |x: &crate::iteration::Pair, c: Cond| t.act(x, c);
        for x in t.pairs() {
            let inv = t.invert_pair(x);
            for c in 0..n {
                out.check(act(x, c).and_then(|d| act(&inv, d)) == Some(c), || format!("{label}: inverse at {c}"));
            }
            for y in t.pairs() {
                let comp = t.compose_pair(x, y);
                let conj = t.conjugate_pair(x, y);
                for c in 0..n {
                    let direct = act(y, c).and_then(|d| act(x, d));
                    out.check(act(&comp, c) == direct, || format!("{label}: composition at {c}"));
                    let around = act(&inv, c).and_then(|d| act(y, d)).and_then(|d| act(x, d));
                    out.check(act(&conj, c) == around, || format!("{label}: conjugation at {c}"));
                }
            }
        }
        out.check(t.system().filter().is_normal(), || format!("{label}: filter not normal"));
    }
}

/// Rank-1 names of width at most 2 and single-entry rank-2 names over them.
fn two_step_inventory(t: &TwoStep) -> Vec<PName> {
    let poset = t.system().poset();
    let n = poset.len();
    let mut ones = vec![PName::empty()];
    for c in 0..n {
        ones.push(PName::new([(c, PName::empty())]));
        for d in c + 1..n {
            ones.push(PName::new([(c, PName::empty()), (d, PName::empty())]));
        }
    }
    let mut names = ones.clone();
    for c in 0..n {
        for k in &ones {
            names.push(PName::new([(c, k.clone())]));
        }
    }
    for v in sets_of_rank(2) {
        names.push(check_name(t.system().top(), &v));
    }
    names
}

fn factorization(out: &mut SuiteOutcome) {
    for (label, a, b) in two_step_fixtures() {
        let Some(t) = out.attempt(two_step(&a, &SystemName::check(&a, &b)), label) else { continue };
        let names = two_step_inventory(&t);
        let mut brackets = Vec::with_capacity(names.len());
        for x in &names {
            let Some(bx) = out.attempt(bracket(&t, x), label) else { return };
            if let Some(back) = out.attempt(unbracket(&t, &bx), label) {
                out.check(t.system().profile(&back) == t.system().profile(x), || format!("{label}: unbracket"));
            }
            brackets.push(bx);
        }
        for g in enumerate_symmetric_generics(t.system()) {
            let Some(f) = out.attempt(factor_generic(&t, &g), label) else { continue };
            let again = compose_generic(&t, &f.g0, &f.g1).map(|h| h.conds);
            out.check(again.as_ref().ok() == Some(&g.conds), || format!("{label}: round trip at atom {}", g.atom));
            for (x, bx) in names.iter().zip(&brackets) {
                if let Some(opened) = out.attempt(open_bracket(&t, bx, f.base_generic), label) {
                    out.check(opened.eval(f.g1.conds) == x.eval(g.conds), || format!("{label}: bracket at atom {}", g.atom));
                }
            }
        }
    }
}

fn product_and_reduced(out: &mut SuiteOutcome) {
    let formulas = default_formulas();
    for (label, a, b) in two_step_fixtures() {
        let stage = SystemName::check(&a, &b);
        let (Some(prod), Some(t)) = (out.attempt(product(&a, &b), label), out.attempt(two_step(&a, &stage), label)) else {
            continue;
        };
        match out.attempt(find_equivalence(&prod, t.system(), NameClass::N, 2), label) {
            Some(Some(w)) => {
                if let Some(r) = out.attempt(validate_witness(&prod, t.system(), &w, &formulas), label) {
                    out.check(r.is_valid(), || format!("{label}: witness fails {:?}", r.violations));
                }
            }
            Some(None) => out.check(false, || format!("{label}: no witness at rank 2")),
            None => {}
        }
        let Some(red) = out.attempt(reduced_iteration(&a, &stage, &NameWitness::check_names(&a, &b)), label) else {
            continue;
        };
        out.check(red.system().same_up_to_labels(&prod), || format!("{label}: reduced iteration is not the product"));
        for k in 0..=2 {
            let models = |s: &SymSystem| -> Result<BTreeSet<BTreeSet<HSet>>> {
                (0..s.generics().len()).map(|g| s.model_at(g, k)).collect()
            };
            if let (Some(x), Some(y)) = (out.attempt(models(red.system()), label), out.attempt(models(&prod), label)) {
                out.check(x == y, || format!("{label}: models differ at rank {k}"));
            }
        }
        let Some(emb) = out.attempt(reduced_embedding(&red, &t), label) else { continue };
        let Some(hs) = out.attempt(enumerate_hs(red.system(), 1), label) else { continue };
        for x in hs.iter() {
            let lifted = x.map_conditions(&|c| emb[c]);
            if let Some(j) = out.attempt(j_map(&red, &t, x), label) {
                out.check(is_hs(t.system(), &j) && t.system().profile(&j) == t.system().profile(&lifted), || {
                    format!("{label}: j does not preserve values")
                });
            }
        }
    }
}

fn extend_p3(extra: &[Vec<Cond>]) -> Option<Poset> {
    let mut labels: Vec<String> = ["1", "a", "b"].iter().map(|s| s.to_string()).collect();
    let mut edges = vec![(1, 0), (2, 0)];
    for (i, parents) in extra.iter().enumerate() {
        labels.push(format!("n{i}"));
        edges.extend(parents.iter().map(|&p| (3 + i, p)));
    }
    Poset::from_edges(labels, &edges, 0).ok()
}

/// `P3` with up to three new nodes, each hung below one or two existing ones, kept when
/// `P3` sits inside as a subforcing.
pub fn subforcing_fixtures() -> Vec<Poset> {
    let mut shapes: Vec<Vec<Vec<Cond>>> = vec![vec![]];
    let mut frontier = shapes.clone();
    for depth in 0..3 {
        let n = 3 + depth;
        let mut parents: Vec<Vec<Cond>> = (0..n).map(|p| vec![p]).collect();
        parents.extend((0..n).flat_map(|p| (p + 1..n).map(move |q| vec![p, q])));
        frontier = frontier.iter().flat_map(|s| parents.iter().map(move |c| [s.clone(), vec![c.clone()]].concat())).collect();
        shapes.extend(frontier.iter().cloned());
    }
    shapes.iter().filter_map(|s| extend_p3(s)).filter(|q| is_subforcing(&p3(), q, &[0, 1, 2])).collect()
}

fn quotients(out: &mut SuiteOutcome) {
    let id = [0, 1, 2];
    for q in subforcing_fixtures() {
        for s in [striv(), ssym(), sfree()] {
            let a = is_symmetrically_complete(&s, &q, &id);
            let b = every_condition_reduces(&s, &q, &id);
            out.check(matches!((a, b), (Ok(x), Ok(y)) if x == y), || format!("reductions on a {}-element fixture", q.len()));
        }
    }

    let emb = identity_embedding(&p3());
    for s in [ssym(), sfree(), striv()] {
        let Some(basis) = out.attempt(RespectBasis::default_for(&s, 1), "basis") else { continue };
        let Some(qf) = out.attempt(quotient_forcing(&s, s.poset(), &emb, &basis), "quotient forcing") else { continue };
        out.check(qf.name_is_invariant(), || "quotient name is not invariant".into());
        let entries: BTreeSet<&PsiEntry> = qf.entries().iter().collect();
        for pi in 0..s.group().order() {
            for e in qf.entries() {
                let mut pairs: Vec<(usize, usize)> = e.pairs.iter().map(|&(i, j)| (i, qf.basis().act(pi, j))).collect();
                pairs.sort();
                let moved = PsiEntry { p: s.group().element(pi).apply(e.p), r: e.r, pairs };
                out.check(entries.contains(&moved), || format!("ψ-table not invariant under element {pi}"));
            }
        }
    }

    let guards = Guards { poset: 128, ..Guards::default() };
    for (s0, s1) in [(striv(), striv()), (ssym(), striv()), (ssym(), sfree()), (sfree(), striv())] {
        let (s0, s1) = (s0.with_guards(guards), s1.with_guards(guards));
        let Some(basis) = out.attempt(RespectBasis::default_for(&s0, 1), "basis") else { continue };
        let Some(qs) = out.attempt(quotient_system(&s0, &s1, &emb, &basis), "quotient system") else { continue };
        for (gi, &gen) in s1.generics().iter().enumerate() {
            let g = GenericFilter { conds: gen, atom: s1.atoms()[gi], symmetric: true };
            let Some(k) = out.attempt(canonical_quotient_generic(qs.forcing(), &g), "canonical generic") else { continue };
            let poset = qs.forcing().evaluated(k.base_generic).poset().clone();
            out.check(poset.is_filter(k.k) && meets_every_dense(&poset, k.k), || "K is not generic".into());
            out.check(k.domain == gen, || "dom K differs from G".into());
        }
        let Some(t) = out.attempt(quotient_iteration(&qs), "quotient iteration") else { continue };
        let Some(upper) = out.attempt(enumerate_hs(&s1, 1), "upper names") else { continue };
        for x in upper.iter() {
            if let Some(y) = out.attempt(i_map(&qs, &t, x), "i") {
                out.check(is_hs(t.system(), &y), || "i leaves the HS names".into());
            }
        }
        let e = PName::empty();
        let star: Vec<PName> = t.system().poset().conds().map(|c| PName::new([(c, e.clone())])).collect();
        if let Some(r) = out.attempt(full_quotient_report(&qs, &t, &upper, &star, 2), "full quotient") {
            out.check(r.is_valid(), || format!("model equalities: {:?}", r.violations));
        }
    }
}

/// Existential queries in the free variable `vy` with up to two name arguments.
pub fn mixing_queries() -> Vec<&'static str> {
    vec![
        "vy = x0",
        "x0 in vy",
        "vy in x0",
        "vy sub x0 and not vy = x0",
        "x0 in vy and x1 in vy",
        "x0 in vy and not x1 in vy",
        "forall v in vy . v in x0",
        "exists v in vy . not v in x0",
        "vy = vy and not vy = vy",
    ]
}

fn completions(out: &mut SuiteOutcome) {
    let queries: Vec<_> = mixing_queries().iter().map(|q| parse(q).expect("built-in query parses")).collect();
    for (label, s) in [("Striv", striv()), ("Ssym", ssym()), ("Sfree", sfree()), ("L2", l2_system())] {
        let Some(c) = out.attempt(completion(&s, 2), label) else { continue };
        out.check(c.system.is_tenacious(), || format!("{label}: completion is not tenacious"));
        if let Some(again) = out.attempt(completion(&c.system, 2), label) {
            out.check(again.system.same_up_to_labels(&c.system), || format!("{label}: completion is not idempotent"));
            for g in 0..c.system.generics().len() {
                let same = (0..again.system.generics().len())
                    .any(|h| again.system.model_at(h, 2).ok() == c.system.model_at(g, 2).ok());
                out.check(same, || format!("{label}: models of the two completions differ"));
            }
        }
        let cs = &c.system;
        // Queries see their arguments only through values, so one name per symmetric
        // rank-1 profile covers every argument of rank at most 1.
        let Some(profiles) = out.attempt(cs.model_profiles(1), label) else { continue };
        let Some(args) = out.attempt(profiles.iter().map(|f| mixture_name(cs, f)).collect::<Result<Vec<_>>>(), label) else {
            continue;
        };
        let mut satisfiable = 0;
        for p in cs.poset().conds() {
            for (qi, chi) in queries.iter().enumerate() {
                for x0 in args.iter() {
                    for x1 in args.iter().take(if chi.slot_count() > 1 { args.len() } else { 1 }) {
                        let extra = [x0.clone(), x1.clone()];
                        let extra = &extra[..chi.slot_count()];
                        match out.attempt(mixing_witness(cs, p, chi, extra, 2), format!("{label}: query {qi}")) {
                            Some(Some(y)) => {
                                satisfiable += 1;
                                out.check(is_hs(cs, &y) && decides(cs, p, chi, extra, &y), || {
                                    format!("{label}: witness for query {qi} is not decided by {p}")
                                });
                            }
                            Some(None) => out.check(!satisfied_somewhere(cs, p, chi, extra), || {
                                format!("{label}: query {qi} reported unsatisfiable below {p}")
                            }),
                            None => {}
                        }
                    }
                }
            }
        }
        out.check(satisfiable > 0, || format!("{label}: no satisfiable query"));
    }
}

fn env_at(s: &SymSystem, g: usize, extra: &[PName]) -> crate::formula::Assignment {
    crate::formula::Assignment::slots(extra.iter().map(|x| x.eval(s.generics()[g])).collect())
}

/// `p ⊩ χ(y)`, checked at every generic through `p`.
fn decides(s: &SymSystem, p: Cond, chi: &crate::formula::Formula, extra: &[PName], y: &PName) -> bool {
    (0..s.generics().len()).filter(|&g| s.generics()[g] & bit(p) != 0).all(|g| {
        crate::formula::eval(&env_at(s, g, extra).with_var("vy", y.eval(s.generics()[g])), chi).unwrap_or(false)
    })
}

/// Whether every generic through `p` has a witness of rank at most 2.
fn satisfied_somewhere(s: &SymSystem, p: Cond, chi: &crate::formula::Formula, extra: &[PName]) -> bool {
    (0..s.generics().len()).filter(|&g| s.generics()[g] & bit(p) != 0).all(|g| {
        sets_of_rank(2)
            .into_iter()
            .any(|v| crate::formula::eval(&env_at(s, g, extra).with_var("vy", v), chi).unwrap_or(false))
    })
}

fn lottery(out: &mut SuiteOutcome) {
    let p = p3();
    let Some(l) = out.attempt(lottery_system(&p, Guards::default()), "lottery system") else { return };
    out.check(l.same_up_to_labels(&l2_system()), || "lottery sum differs from L2".into());
    let w = lottery_witness(&p, 2);
    if let Some(r) = out.attempt(validate_witness(&l, &striv(), &w, &default_formulas()), "lottery maps") {
        out.check(r.is_valid(), || format!("lottery maps: {:?}", r.violations));
    }
    // The swap pairs each generic with its tagged twin.
    let swap = l.group().element(1 - l.group().identity()).clone();
    fn symmetrize(swap: &crate::perm::Perm, x: &PName) -> PName {
        PName::new(x.entries().iter().flat_map(|(p, y)| {
            let y = symmetrize(swap, y);
            [(*p, y.clone()), (swap.apply(*p), y)]
        }))
    }
    let names: BTreeSet<PName> = thin_inventory(l.poset()).iter().map(|x| symmetrize(&swap, x)).collect();
    for g in l.generics() {
        let twin = swap.apply_set(*g);
        for x in &names {
            out.check(is_hs(&l, x), || "symmetrized name is not HS".into());
            out.check(x.eval(*g) == x.eval(twin), || "tagged copies disagree".into());
        }
    }
}
