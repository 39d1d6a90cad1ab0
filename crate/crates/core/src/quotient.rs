//! Complete subsystems, `H`-reductions, respect diagrams and bases, the quotient forcing
//! `Q/S`, quotient systems, canonical quotient generics and homogeneity witnesses.
//!
//! `P` sits inside `Q` through an *embedding*: the image in `Q` of each condition of `P`.
//! The quotient is an `S`-name; over a finite base it is kept both as that name and as
//! its value at every generic, a finite poset of pairs `(r, a)` with `a` a set of
//! `(basis index, value)` pairs.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::{precondition, Error, Result};
use crate::forcing::{symmetrically_dense_sets, Forcer, GenericFilter};
use crate::formula::Rel;
use crate::hset::HSet;
use crate::iteration::{two_step, SystemName, TwoStep};
use crate::name::{apply, bullet_name, check_name, encode, pair_name, PName};
use crate::order::{bit, members, Cond, CondSet, Poset};
use crate::perm::{Perm, PermGroup, Subgroup};
use crate::symmetric::enumerate_hs;
use crate::system::{Profile, SymSystem, ValidationReport};

/// `p ↦ p`.
pub fn identity_embedding(poset: &Poset) -> Vec<Cond> {
    poset.conds().collect()
}

/// `p ↦ (p, 1̇)` into a two-step iteration.
pub fn two_step_embedding(t: &TwoStep) -> Vec<Cond> {
    let top: Vec<Cond> = (0..t.stage().len()).map(|g| t.stage().at(g).top()).collect();
    t.base().poset().conds().map(|p| t.locate(p, &top).expect("the trivial second coordinate is present")).collect()
}

/// Why `emb` fails to make `P` a subforcing of `Q`: it must be injective and preserve
/// both the order and incompatibility in each direction.
pub fn subforcing_violations(p: &Poset, q: &Poset, emb: &[Cond]) -> Vec<String> {
    let mut out = Vec::new();
    if emb.len() != p.len() {
        out.push(format!("embedding has {} images for {} conditions", emb.len(), p.len()));
        return out;
    }
    if let Some(&bad) = emb.iter().find(|&&c| c >= q.len()) {
        out.push(format!("image {bad} is not a condition of the ambient poset"));
        return out;
    }
    for a in p.conds() {
        for b in p.conds() {
            if a < b && emb[a] == emb[b] {
                out.push(format!("{} and {} share an image", p.label(a), p.label(b)));
            }
            if p.leq(a, b) != q.leq(emb[a], emb[b]) {
                out.push(format!("order differs on ({}, {})", p.label(a), p.label(b)));
            }
            if a < b && p.compat(a, b) != q.compat(emb[a], emb[b]) {
                out.push(format!("compatibility differs on ({}, {})", p.label(a), p.label(b)));
            }
        }
    }
    out
}

pub fn is_subforcing(p: &Poset, q: &Poset, emb: &[Cond]) -> bool {
    subforcing_violations(p, q, emb).is_empty()
}

/// `σ↾P` as an element of `S0`'s group, if `σ` maps `P` onto itself inside it.
pub fn restriction(s0: &SymSystem, s1: &SymSystem, emb: &[Cond], sigma: usize) -> Option<usize> {
    let back: HashMap<Cond, Cond> = emb.iter().enumerate().map(|(p, &c)| (c, p)).collect();
    let perm = s1.group().element(sigma);
    let images = emb.iter().map(|&c| back.get(&perm.apply(c)).copied()).collect::<Option<Vec<_>>>()?;
    s0.group().index_of(&Perm::from_images(images).ok()?)
}

/// Every `S`-symmetrically dense subset of `P` is predense in `Q`.
pub fn is_symmetrically_complete(s: &SymSystem, q: &Poset, emb: &[Cond]) -> Result<bool> {
    for d in symmetrically_dense_sets(s)? {
        let image: CondSet = members(d).fold(0, |acc, p| acc | bit(emb[p]));
        if !q.is_predense(image) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks the three clauses of `S0 ⋖ S1`; messages start with `clause N:`.
///
/// Filters are principal, so clause (2) reduces to the cores: `K↾P ≤ H` for some
/// `K ∈ E` and every `H ∈ F` exactly when the core of `E` restricts into the core of `F`.
pub fn complete_subsystem_report(s0: &SymSystem, s1: &SymSystem, emb: &[Cond]) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    for v in subforcing_violations(s0.poset(), s1.poset(), emb) {
        report.violations.push(format!("clause 1: {v}"));
    }
    if !report.is_valid() {
        return Ok(report);
    }
    let core0 = s0.filter().core();
    for sigma in s1.filter().core().iter() {
        match restriction(s0, s1, emb, sigma) {
            None => report.violations.push(format!("clause 2: core element {sigma} does not restrict to the subsystem")),
            Some(rho) if !core0.contains(rho) => {
                report.violations.push(format!("clause 2: core element {sigma} restricts outside the filter"))
            }
            Some(_) => {}
        }
    }
    if !is_symmetrically_complete(s0, s1.poset(), emb)? {
        report.violations.push("clause 3: a symmetrically dense set is not predense above".into());
    }
    Ok(report)
}

/// Clauses (1) and (2).
pub fn is_subsystem(s0: &SymSystem, s1: &SymSystem, emb: &[Cond]) -> Result<bool> {
    let report = complete_subsystem_report(s0, s1, emb)?;
    Ok(report.violations.iter().all(|v| v.starts_with("clause 3")))
}

pub fn is_complete_subsystem(s0: &SymSystem, s1: &SymSystem, emb: &[Cond]) -> Result<bool> {
    Ok(complete_subsystem_report(s0, s1, emb)?.is_valid())
}

/// Every `r ≤ p` in `P` has an `H`-image compatible with `q` in `Q`.
pub fn is_h_reduction(
    p_poset: &Poset,
    q_poset: &Poset,
    emb: &[Cond],
    group: &PermGroup,
    h: &Subgroup,
    p: Cond,
    q: Cond,
) -> bool {
    members(p_poset.below(p)).all(|r| h.iter().any(|pi| q_poset.compat(emb[group.element(pi).apply(r)], q)))
}

/// An `H`-reduction of `q`, preferring the weakest: conditions with fewer conditions
/// above them come first, then by index.
pub fn h_reduction(
    p_poset: &Poset,
    q_poset: &Poset,
    emb: &[Cond],
    group: &PermGroup,
    h: &Subgroup,
    q: Cond,
) -> Result<Option<Cond>> {
    if let Some(v) = subforcing_violations(p_poset, q_poset, emb).first() {
        return precondition(format!("not a subforcing: {v}"));
    }
    if q >= q_poset.len() {
        return Err(Error::UnknownCondition(q.to_string()));
    }
    let mut order: Vec<Cond> = p_poset.conds().collect();
    order.sort_by_key(|&p| (p_poset.above(p).count_ones(), p));
    Ok(order.into_iter().find(|&p| is_h_reduction(p_poset, q_poset, emb, group, h, p, q)))
}

/// Every condition of `Q` has an `H`-reduction for every `H` in the filter.
pub fn every_condition_reduces(s: &SymSystem, q: &Poset, emb: &[Cond]) -> Result<bool> {
    let group = s.group();
    for h in group.subgroups_containing(s.filter().core()) {
        for c in q.conds() {
            if h_reduction(s.poset(), q, emb, group, &h, c)?.is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `R(x) = {(p, π) : p ⊩ π(x) = x}`, stored as the forcing set of each group element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RespectDiagram {
    forcing: Vec<CondSet>,
}

impl RespectDiagram {
    pub fn contains(&self, p: Cond, pi: usize) -> bool {
        self.forcing[pi] & bit(p) != 0
    }

    /// `{p : (p, π) ∈ R}`.
    pub fn conditions_for(&self, pi: usize) -> CondSet {
        self.forcing[pi]
    }

    pub fn pairs(&self) -> Vec<(Cond, usize)> {
        let mut out: Vec<(Cond, usize)> =
            self.forcing.iter().enumerate().flat_map(|(pi, &s)| members(s).map(move |p| (p, pi))).collect();
        out.sort();
        out
    }

    pub fn len(&self) -> usize {
        self.forcing.iter().map(|s| s.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_subset(&self, other: &RespectDiagram) -> bool {
        self.forcing.iter().zip(&other.forcing).all(|(a, b)| a & !b == 0)
    }
}

/// The respect diagram by the forcing recursion.
pub fn respect_diagram(s: &SymSystem, x: &PName) -> Result<RespectDiagram> {
    let mut forcer = Forcer::new(s.poset());
    let forcing = s.group().elements().iter().map(|pi| forcer.forcing_set(Rel::Eq, &apply(pi, x), x)).collect();
    Ok(RespectDiagram { forcing })
}

/// The respect diagram of any name with this profile.
fn profile_diagram(s: &SymSystem, f: &[HSet]) -> RespectDiagram {
    let forcing = (0..s.group().order())
        .map(|pi| {
            let moved = s.act_profile(pi, f);
            s.conditions_within(s.generics_where(|g| moved[g] == f[g]))
        })
        .collect();
    RespectDiagram { forcing }
}

/// A `G`-closed family of names together with the policy that produced it.
#[derive(Debug, Clone)]
pub struct RespectBasis {
    names: Vec<PName>,
    profiles: Vec<Profile>,
    /// `action[π][i]` is the index of `π(names[i])`.
    action: Vec<Vec<usize>>,
    policy: String,
}

impl RespectBasis {
    /// Fails unless the names are closed under the group.
    pub fn new(s: &SymSystem, names: Vec<PName>, policy: impl Into<String>) -> Result<RespectBasis> {
        let mut names = names;
        names.sort();
        names.dedup();
        if names.is_empty() {
            return precondition("a respect basis needs at least one name");
        }
        let index: HashMap<PName, usize> = names.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
        let mut action = Vec::with_capacity(s.group().order());
        for pi in s.group().elements() {
            let row = names.iter().map(|x| index.get(&apply(pi, x)).copied()).collect::<Option<Vec<_>>>();
            match row {
                Some(row) => action.push(row),
                None => return precondition("respect basis is not closed under the group"),
            }
        }
        let profiles = names.iter().map(|x| s.profile(x)).collect();
        Ok(RespectBasis { names, profiles, action, policy: policy.into() })
    }

    /// The names themselves together with all their images.
    pub fn closure_of(s: &SymSystem, names: &[PName], policy: impl Into<String>) -> Result<RespectBasis> {
        let all = s.group().elements().iter().flat_map(|pi| names.iter().map(move |x| apply(pi, x))).collect();
        RespectBasis::new(s, all, policy)
    }

    /// `HS` names of rank at most `rank`.
    pub fn hs_fragment(s: &SymSystem, rank: usize) -> Result<RespectBasis> {
        let names = enumerate_hs(s, rank)?.to_vec();
        RespectBasis::new(s, names, format!("HS rank <= {rank}"))
    }

    /// The least-rank `HS` fragment that passes [`respect_basis_check`] at `k`.
    ///
    /// Every minimal condition forces each name equal to a check name, and check
    /// names are respected by the whole group, so at finite scale the rank-0
    /// fragment `{∅}` already qualifies.
    pub fn default_for(s: &SymSystem, k: usize) -> Result<RespectBasis> {
        for rank in 0..=k {
            let basis = RespectBasis::hs_fragment(s, rank)?;
            if respect_basis_check(s, &basis.names, k)? {
                return Ok(basis);
            }
        }
        precondition(format!("no HS fragment of rank at most {k} is a respect basis"))
    }

    pub fn names(&self) -> &[PName] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &PName {
        &self.names[i]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn profile(&self, i: usize) -> &Profile {
        &self.profiles[i]
    }

    /// Index of `π(names[i])`.
    pub fn act(&self, pi: usize, i: usize) -> usize {
        self.action[pi][i]
    }

    pub fn index_of(&self, x: &PName) -> Option<usize> {
        self.names.binary_search(x).ok()
    }

    pub fn policy(&self) -> &str {
        &self.policy
    }
}

/// Checks both clauses for a candidate basis against the `HS` names of rank `≤ k`:
/// the density clause and closure under the group.
pub fn respect_basis_report(s: &SymSystem, names: &[PName], k: usize) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let set: BTreeSet<&PName> = names.iter().collect();
    for pi in s.group().elements() {
        if names.iter().any(|x| !set.contains(&apply(pi, x))) {
            report.violations.push("clause 2: not closed under the group".into());
            break;
        }
    }
    let basis: Vec<RespectDiagram> = names.iter().map(|y| profile_diagram(s, &s.profile(y))).collect();
    let hs = s.model_profiles(k)?;
    // `x'` qualifies when some basis diagram lies inside its own.
    let good: Vec<&Profile> =
        hs.iter().filter(|f| { let d = profile_diagram(s, f); basis.iter().any(|b| b.is_subset(&d)) }).collect();
    for (n, f) in hs.iter().enumerate() {
        let dense: CondSet = good
            .iter()
            .fold(0, |acc, g| acc | s.conditions_within(s.generics_where(|i| f[i] == g[i])));
        if !s.poset().is_dense(dense) {
            report.violations.push(format!("clause 1: density fails for HS profile {n}"));
        }
    }
    Ok(report)
}

pub fn respect_basis_check(s: &SymSystem, names: &[PName], k: usize) -> Result<bool> {
    Ok(respect_basis_report(s, names, k)?.is_valid())
}

/// A condition of an evaluated quotient: `r` and the pairs `(basis index, value)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuotientCond {
    pub r: Cond,
    pub pairs: BTreeSet<(usize, HSet)>,
}

/// An entry `(p, (ř, {(x̌_i, y_i)})•)` of the quotient name, with the pairs as basis
/// indices `(i, j)` standing for `(x_i, x_j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PsiEntry {
    pub p: Cond,
    pub r: Cond,
    pub pairs: Vec<(usize, usize)>,
}

/// The value of the quotient name at one generic.
#[derive(Debug, Clone)]
pub struct EvaluatedQuotient {
    conds: Vec<QuotientCond>,
    index: HashMap<QuotientCond, usize>,
    poset: Arc<Poset>,
}

impl EvaluatedQuotient {
    pub fn conds(&self) -> &[QuotientCond] {
        &self.conds
    }

    pub fn cond(&self, i: usize) -> &QuotientCond {
        &self.conds[i]
    }

    pub fn index_of(&self, c: &QuotientCond) -> Option<usize> {
        self.index.get(c).copied()
    }

    pub fn poset(&self) -> &Arc<Poset> {
        &self.poset
    }

    pub fn len(&self) -> usize {
        self.conds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conds.is_empty()
    }
}

/// The quotient forcing `Q/S` as a table of ψ-entries, the `S`-name they form, and its
/// value at each generic of `S`.
#[derive(Debug)]
pub struct QuotientForcing {
    base: Arc<SymSystem>,
    ambient: Arc<Poset>,
    embedding: Vec<Cond>,
    basis: RespectBasis,
    /// `forced[p][π]`: pairs `(i, j)` (bit `i·m + j`) with `p ⊩ π(x_i) = x_j`.
    forced: Vec<Vec<u64>>,
    /// `reach[p'][π]`: conditions of `Q` compatible with `π⁻¹(p')`.
    reach: Vec<Vec<CondSet>>,
    entries: Vec<PsiEntry>,
    name: PName,
    evaluated: Vec<EvaluatedQuotient>,
}

fn mask_pairs(mask: u64, m: usize) -> Vec<(usize, usize)> {
    (0..64).filter(|b| mask & (1 << b) != 0).map(|b| (b / m, b % m)).collect()
}

impl QuotientForcing {
    pub fn base(&self) -> &SymSystem {
        &self.base
    }

    pub fn ambient(&self) -> &Poset {
        &self.ambient
    }

    pub fn embedding(&self) -> &[Cond] {
        &self.embedding
    }

    pub fn basis(&self) -> &RespectBasis {
        &self.basis
    }

    /// All `(p, r, pairs)` satisfying ψ, sorted.
    pub fn entries(&self) -> &[PsiEntry] {
        &self.entries
    }

    /// The `S`-name `Q̇/S`.
    pub fn name(&self) -> &PName {
        &self.name
    }

    /// The value at the generic with index `g` among the base generics.
    pub fn evaluated(&self, g: usize) -> &EvaluatedQuotient {
        &self.evaluated[g]
    }

    fn mask(&self, pairs: &[(usize, usize)]) -> u64 {
        let m = self.basis.len();
        pairs.iter().fold(0, |acc, &(i, j)| acc | 1 << (i * m + j))
    }

    /// `ψ(p, r, (x_i, y_i))`: every `p' ≤ p` has a `π` with `p ⊩ π(x_i) = y_i` and
    /// `π⁻¹(p') ∥ r`.
    pub fn psi(&self, p: Cond, r: Cond, pairs: &[(usize, usize)]) -> bool {
        let mask = self.mask(pairs);
        let allowed: Vec<usize> = (0..self.base.group().order()).filter(|&pi| mask & !self.forced[p][pi] == 0).collect();
        members(self.base.poset().below(p)).all(|q| allowed.iter().any(|&pi| self.reach[q][pi] & bit(r) != 0))
    }

    /// The density-equivalent form: one `π` with `p ⊩ π(x_i) = y_i` and `π⁻¹(p) ≤ r`.
    pub fn psi_prime(&self, p: Cond, r: Cond, pairs: &[(usize, usize)]) -> bool {
        self.psi_prime_witness(p, r, pairs).is_some()
    }

    pub fn psi_prime_witness(&self, p: Cond, r: Cond, pairs: &[(usize, usize)]) -> Option<usize> {
        let mask = self.mask(pairs);
        let g = self.base.group();
        (0..g.order()).find(|&pi| {
            mask & !self.forced[p][pi] == 0 && self.ambient.leq(self.embedding[g.element(g.inv(pi)).apply(p)], r)
        })
    }

    /// The value of an entry at a generic.
    pub fn value(&self, g: usize, r: Cond, pairs: &[(usize, usize)]) -> QuotientCond {
        QuotientCond { r, pairs: pairs.iter().map(|&(i, j)| (i, self.basis.profile(j)[g].clone())).collect() }
    }

    /// Reads an evaluated condition back from the value of the quotient name.
    pub fn read_value(&self, v: &HSet) -> Option<QuotientCond> {
        let (r, pairs) = v.unpair()?;
        let r = r.decode()? as Cond;
        let codes: HashMap<HSet, usize> = self.basis.names.iter().enumerate().map(|(i, x)| (encode(x), i)).collect();
        let mut out = BTreeSet::new();
        for e in pairs.elems() {
            let (x, y) = e.unpair()?;
            out.insert((*codes.get(&x)?, y));
        }
        Some(QuotientCond { r, pairs: out })
    }

    /// The evaluated quotient obtained from ψ' in place of ψ.
    pub fn evaluated_by_psi_prime(&self, g: usize) -> BTreeSet<QuotientCond> {
        let mut out = BTreeSet::new();
        let gen = self.base.generics()[g];
        for p in members(gen) {
            for mask in self.candidate_masks(p) {
                let pairs = mask_pairs(mask, self.basis.len());
                for r in self.ambient.conds() {
                    if self.psi_prime(p, r, &pairs) {
                        out.insert(self.value(g, r, &pairs));
                    }
                }
            }
        }
        out
    }

    /// Pair sets that some single `π` is forced to realize at `p`.
    fn candidate_masks(&self, p: Cond) -> BTreeSet<u64> {
        let mut out = BTreeSet::new();
        for &a in &self.forced[p] {
            let mut sub = a;
            loop {
                out.insert(sub);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & a;
            }
        }
        out
    }

    /// `σ(Q̇/S) = Q̇/S` for every `σ` in the group.
    pub fn name_is_invariant(&self) -> bool {
        self.base.group().elements().iter().all(|pi| apply(pi, &self.name) == self.name)
    }
}

/// Builds `Q̇/S` for `P ⋖_S Q`.
pub fn quotient_forcing(s: &SymSystem, q: &Poset, emb: &[Cond], basis: &RespectBasis) -> Result<QuotientForcing> {
    if let Some(v) = subforcing_violations(s.poset(), q, emb).first() {
        return precondition(format!("not a subforcing: {v}"));
    }
    if !is_symmetrically_complete(s, q, emb)? {
        return precondition("the base is not symmetrically complete in the ambient poset");
    }
    let m = basis.len();
    if m * m > 64 {
        return Err(Error::GuardExceeded { what: "basis pairs", size: (m * m) as u128, limit: 64 });
    }
    let g = s.group();
    let p_poset = s.poset();
    let forced: Vec<Vec<u64>> = p_poset
        .conds()
        .map(|p| {
            let gens = s.generics_of(p);
            (0..g.order())
                .map(|pi| {
                    let inv = g.inv(pi);
                    let mut mask = 0u64;
                    for i in 0..m {
                        for j in 0..m {
                            let (fi, fj) = (basis.profile(i), basis.profile(j));
                            if members(gens).all(|gi| fi[s.act_generic(inv, gi)] == fj[gi]) {
                                mask |= 1 << (i * m + j);
                            }
                        }
                    }
                    mask
                })
                .collect()
        })
        .collect();
    let reach: Vec<Vec<CondSet>> = p_poset
        .conds()
        .map(|p| {
            (0..g.order())
                .map(|pi| {
                    let moved = emb[g.element(g.inv(pi)).apply(p)];
                    q.conds().filter(|&r| q.compat(moved, r)).fold(0, |acc, r| acc | bit(r))
                })
                .collect()
        })
        .collect();
    let mut qf = QuotientForcing {
        base: Arc::new(s.clone()),
        ambient: Arc::new(q.clone()),
        embedding: emb.to_vec(),
        basis: basis.clone(),
        forced,
        reach,
        entries: Vec::new(),
        name: PName::empty(),
        evaluated: Vec::new(),
    };
    let mut entries = Vec::new();
    for p in p_poset.conds() {
        let masks = qf.candidate_masks(p);
        s.guards().check_names(masks.len() as u128)?;
        for mask in masks {
            let pairs = mask_pairs(mask, m);
            for r in q.conds() {
                if qf.psi(p, r, &pairs) {
                    entries.push(PsiEntry { p, r, pairs: pairs.clone() });
                }
            }
        }
    }
    entries.sort();
    let top = s.top();
    let codes: Vec<PName> = basis.names.iter().map(|x| check_name(top, &encode(x))).collect();
    let name = PName::new(entries.iter().map(|e| {
        let rhs = bullet_name(top, e.pairs.iter().map(|&(i, j)| pair_name(top, &codes[i], &basis.names[j])));
        (e.p, pair_name(top, &check_name(top, &HSet::code(e.r as u64)), &rhs))
    }));
    let mut evaluated = Vec::with_capacity(s.generics().len());
    for (gi, &gen) in s.generics().iter().enumerate() {
        let conds: BTreeSet<QuotientCond> =
            entries.iter().filter(|e| gen & bit(e.p) != 0).map(|e| qf.value(gi, e.r, &e.pairs)).collect();
        evaluated.push(evaluate(q, conds.into_iter().collect(), s)?);
    }
    qf.entries = entries;
    qf.name = name;
    qf.evaluated = evaluated;
    Ok(qf)
}

fn evaluate(q: &Poset, conds: Vec<QuotientCond>, s: &SymSystem) -> Result<EvaluatedQuotient> {
    s.guards().check_poset(conds.len())?;
    let index: HashMap<QuotientCond, usize> = conds.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    let top = QuotientCond { r: q.top(), pairs: BTreeSet::new() };
    let top = *index.get(&top).ok_or_else(|| Error::Precondition("the trivial quotient condition is missing".into()))?;
    let labels = conds
        .iter()
        .map(|c| {
            let pairs: Vec<String> = c.pairs.iter().map(|(i, v)| format!("x{i}={v}")).collect();
            format!("({},{{{}}})", q.label(c.r), pairs.join(","))
        })
        .collect();
    let poset = Poset::from_fn(labels, top, |i, j| {
        let (a, b) = (&conds[i], &conds[j]);
        q.leq(a.r, b.r) && b.pairs.is_subset(&a.pairs)
    })?;
    Ok(EvaluatedQuotient { conds, index, poset: Arc::new(poset) })
}

/// The quotient system `S1/S0` as an `S0`-name, with the group `H/S0` acting by
/// `σ(r, {(x_i, y_i)}) = (σ(r), {(σ↾P(x_i), y_i)})` and the filter `E/S0`.
#[derive(Debug)]
pub struct QuotientSystem {
    forcing: QuotientForcing,
    upper: Arc<SymSystem>,
    /// Elements of `H/S0` as indices into the group of `S1`.
    elements: Vec<usize>,
    /// Their restrictions, as indices into the group of `S0`.
    restrictions: Vec<usize>,
    name: SystemName,
}

impl QuotientSystem {
    pub fn forcing(&self) -> &QuotientForcing {
        &self.forcing
    }

    pub fn upper(&self) -> &SymSystem {
        &self.upper
    }

    /// `H/S0` as indices into the group of `S1`.
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn restriction_of(&self, k: usize) -> usize {
        self.restrictions[k]
    }

    pub fn name(&self) -> &SystemName {
        &self.name
    }

    /// The action of the `k`-th element of `H/S0` on a condition at generic `g`.
    pub fn act(&self, k: usize, g: usize, c: usize) -> Option<usize> {
        act_quotient(&self.forcing, &self.upper, self.elements[k], self.restrictions[k], g, c)
    }
}

fn act_quotient(qf: &QuotientForcing, s1: &SymSystem, sigma: usize, rho: usize, g: usize, c: usize) -> Option<usize> {
    let ev = &qf.evaluated[g];
    let cond = &ev.conds[c];
    let moved = QuotientCond {
        r: s1.group().element(sigma).apply(cond.r),
        pairs: cond.pairs.iter().map(|(i, v)| (qf.basis.act(rho, *i), v.clone())).collect(),
    };
    ev.index_of(&moved)
}

/// Builds `S1/S0` for `S0 ⋖ S1`.
pub fn quotient_system(s0: &SymSystem, s1: &SymSystem, emb: &[Cond], basis: &RespectBasis) -> Result<QuotientSystem> {
    let report = complete_subsystem_report(s0, s1, emb)?;
    if let Some(v) = report.violations.first() {
        return precondition(format!("not a complete subsystem: {v}"));
    }
    let forcing = quotient_forcing(s0, s1.poset(), emb, basis)?;
    let mut elements = Vec::new();
    let mut restrictions = Vec::new();
    for sigma in 0..s1.group().order() {
        if let Some(rho) = restriction(s0, s1, emb, sigma) {
            elements.push(sigma);
            restrictions.push(rho);
        }
    }
    let core_e = s1.filter().core();
    let mut family = Vec::with_capacity(s0.generics().len());
    for g in 0..s0.generics().len() {
        let ev = &forcing.evaluated[g];
        let mut perms = Vec::with_capacity(elements.len());
        for (&sigma, &rho) in elements.iter().zip(&restrictions) {
            let images = (0..ev.len())
                .map(|c| act_quotient(&forcing, s1, sigma, rho, g, c))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Precondition("the quotient action leaves the evaluated quotient".into()))?;
            perms.push(Perm::from_images(images)?);
        }
        let core_perms: Vec<Perm> =
            elements.iter().zip(&perms).filter(|(e, _)| core_e.contains(**e)).map(|(_, p)| p.clone()).collect();
        let group = Arc::new(PermGroup::from_elements(ev.len(), perms.clone(), perms)?);
        let core = group.subgroup_of(&core_perms)?;
        family.push(SymSystem::with_core(ev.poset.clone(), group, core, *s0.guards())?);
    }
    let name = SystemName::from_family(s0, family)?;
    Ok(QuotientSystem { forcing, upper: Arc::new(s1.clone()), elements, restrictions, name })
}

/// `K = G × [{(ẋ, ẋ^G) : ẋ ∈ R}]^{<ω}` for a generic `G` of the ambient poset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalGeneric {
    /// Index of `G0 = G ∩ P` among the base generics.
    pub base_generic: usize,
    pub g0: GenericFilter,
    /// `K` as a set of conditions of the evaluated quotient at `G0`.
    pub k: CondSet,
    /// `dom K`, as conditions of the ambient poset.
    pub domain: CondSet,
}

impl CanonicalGeneric {
    /// `K` as a generic filter, when it is the cone above a minimal condition.
    pub fn as_generic(&self, qf: &QuotientForcing) -> Option<GenericFilter> {
        let poset = &qf.evaluated[self.base_generic].poset;
        members(self.k & poset.minimal()).find(|&m| poset.above(m) == self.k).map(|m| GenericFilter {
            conds: self.k,
            atom: m,
            symmetric: true,
        })
    }
}

pub fn canonical_quotient_generic(qf: &QuotientForcing, g: &GenericFilter) -> Result<CanonicalGeneric> {
    let g0_conds: CondSet = qf.base.poset().conds().filter(|&p| g.conds & bit(qf.embedding[p]) != 0).fold(0, |acc, p| acc | bit(p));
    let b = qf
        .base
        .generics()
        .iter()
        .position(|&c| c == g0_conds)
        .ok_or_else(|| Error::Precondition("the trace on the base is not a generic of the base".into()))?;
    let ev = &qf.evaluated[b];
    let mut k: CondSet = 0;
    let mut domain: CondSet = 0;
    for (i, c) in ev.conds.iter().enumerate() {
        if g.conds & bit(c.r) != 0 && c.pairs.iter().all(|(x, v)| qf.basis.profile(*x)[b] == *v) {
            k |= bit(i);
            domain |= bit(c.r);
        }
    }
    let g0 = GenericFilter { conds: g0_conds, atom: qf.base.atoms()[b], symmetric: true };
    Ok(CanonicalGeneric { base_generic: b, g0, k, domain })
}

/// A set meets every dense subset of a finite preorder exactly when it contains a
/// whole class of equivalent minimal conditions.
pub fn meets_every_dense(poset: &Poset, set: CondSet) -> bool {
    members(poset.minimal()).any(|m| poset.below(m) & !set == 0)
}

/// A nonempty, upward closed, pairwise compatible set (compatible inside the set).
pub fn is_filter(poset: &Poset, set: CondSet) -> bool {
    poset.is_filter(set)
}

/// An automorphism `σ` of the evaluated quotient `P/S` at generic `g` moving `c0` to a
/// condition compatible with `c1`: `σ(r, b) = (τ(r), {(τ(ẋ), y)})` with `τ = π1⁻¹π0`
/// for ψ'-witnesses `π0`, `π1` of `c0`, `c1` at conditions of the generic.
pub fn homogeneity_witness(qf: &QuotientForcing, g: usize, c0: usize, c1: usize) -> Result<Perm> {
    if *qf.ambient != **qf.base.poset() || qf.embedding != identity_embedding(&qf.ambient) {
        return precondition("homogeneity is stated for the quotient of the base poset itself");
    }
    let ev = &qf.evaluated[g];
    if c0 >= ev.len() || c1 >= ev.len() {
        return Err(Error::UnknownCondition(format!("{}", c0.max(c1))));
    }
    let group = qf.base.group();
    let gen = qf.base.generics()[g];
    let witness = |c: &QuotientCond| -> Option<usize> {
        members(gen).find_map(|p| {
            (0..group.order()).find(|&pi| {
                let inv = group.inv(pi);
                qf.ambient.leq(group.element(inv).apply(p), c.r)
                    && c.pairs.iter().all(|(i, v)| qf.basis.profile(*i)[qf.base.act_generic(inv, g)] == *v)
            })
        })
    };
    let pi0 = witness(&ev.conds[c0]).ok_or_else(|| Error::Precondition("no witness for the first condition".into()))?;
    let pi1 = witness(&ev.conds[c1]).ok_or_else(|| Error::Precondition("no witness for the second condition".into()))?;
    let tau = group.mul(group.inv(pi1), pi0);
    let images = (0..ev.len())
        .map(|c| {
            let cond = &ev.conds[c];
            let moved = QuotientCond {
                r: group.element(tau).apply(cond.r),
                pairs: cond.pairs.iter().map(|(i, v)| (qf.basis.act(tau, *i), v.clone())).collect(),
            };
            ev.index_of(&moved)
        })
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Precondition("the induced map leaves the evaluated quotient".into()))?;
    let sigma = Perm::from_images(images)?;
    if !ev.poset.compat(sigma.apply(c0), c1) {
        return precondition("the induced map does not make the conditions compatible");
    }
    Ok(sigma)
}

/// `S0 * Ṡ1/S0`.
pub fn quotient_iteration(qs: &QuotientSystem) -> Result<TwoStep> {
    two_step(qs.forcing.base(), &qs.name)
}

/// `i(ẋ) = {((p, (ř, ∅)•), i(ẏ)) : ψ(p, r, ∅), (r, ẏ) ∈ ẋ}`, from `S1`-names to names
/// of the quotient iteration. Where `(r, ∅)` is absent from the quotient at a generic
/// not containing `p`, the second coordinate is the trivial condition there; such
/// generics never see the entry.
pub fn i_map(qs: &QuotientSystem, t: &TwoStep, x: &PName) -> Result<PName> {
    let mut memo = HashMap::new();
    i_rec(qs, t, x, &mut memo)
}

fn i_rec(qs: &QuotientSystem, t: &TwoStep, x: &PName, memo: &mut HashMap<u32, PName>) -> Result<PName> {
    if let Some(y) = memo.get(&x.id()) {
        return Ok(y.clone());
    }
    let qf = &qs.forcing;
    let mut entries = Vec::new();
    for (r, y) in x.entries() {
        let iy = i_rec(qs, t, y, memo)?;
        let plain = QuotientCond { r: *r, pairs: BTreeSet::new() };
        let f: Vec<Cond> = (0..qs.name.len())
            .map(|g| qf.evaluated[g].index_of(&plain).unwrap_or_else(|| qs.name.at(g).top()))
            .collect();
        for p in qf.base.poset().conds() {
            if qf.psi(p, *r, &[]) {
                let c = t.locate(p, &f).ok_or_else(|| Error::Precondition("second coordinate not in the iteration".into()))?;
                entries.push((c, iy.clone()));
            }
        }
    }
    let out = PName::new(entries);
    memo.insert(x.id(), out.clone());
    Ok(out)
}

/// `i*(ẋ) = {(r, i*(ẏ)) : ((p, q̇), ẏ) ∈ ẋ, χ(r, p, q̇)}` where `χ` asks for `p' ≤ p`
/// above `r` and a finite `X ⊆ R` with `p' ⊩ (ř, {(ž, z) : z ∈ X})• ≤ q̇`.
pub fn i_star_map(qs: &QuotientSystem, t: &TwoStep, x: &PName) -> Result<PName> {
    let mut memo = HashMap::new();
    let mut chi = HashMap::new();
    Ok(i_star_rec(qs, t, x, &mut memo, &mut chi))
}

fn chi(qs: &QuotientSystem, t: &TwoStep, r: Cond, c: Cond) -> bool {
    let qf = &qs.forcing;
    let (p, f) = t.split(c);
    let base = qf.base.poset();
    let m = qf.basis.len();
    members(base.below(p)).filter(|&p2| qf.ambient.leq(r, qf.embedding[p2])).any(|p2| {
        (0u64..(1 << m)).any(|xs| {
            members(qf.base.generics_of(p2)).all(|g| {
                let ev = &qf.evaluated[g];
                let cond = QuotientCond {
                    r,
                    pairs: (0..m).filter(|i| xs & (1 << i) != 0).map(|i| (i, qf.basis.profile(i)[g].clone())).collect(),
                };
                ev.index_of(&cond).is_some_and(|i| ev.poset.leq(i, f[g]))
            })
        })
    })
}

fn i_star_rec(
    qs: &QuotientSystem,
    t: &TwoStep,
    x: &PName,
    memo: &mut HashMap<u32, PName>,
    chis: &mut HashMap<(Cond, Cond), bool>,
) -> PName {
    if let Some(y) = memo.get(&x.id()) {
        return y.clone();
    }
    let mut entries = Vec::new();
    for (c, y) in x.entries() {
        let iy = i_star_rec(qs, t, y, memo, chis);
        for r in qs.forcing.ambient.conds() {
            if *chis.entry((r, *c)).or_insert_with(|| chi(qs, t, r, *c)) {
                entries.push((r, iy.clone()));
            }
        }
    }
    let out = PName::new(entries);
    memo.insert(x.id(), out.clone());
    out
}

/// Checks, for every generic `G` of `S1`, the three parts of the quotient theorem:
/// `G ∩ P` is a generic of `S0`; the canonical `K` is a filter in the evaluated quotient
/// meeting every dense set with `dom K = G`; and through `G0 * K` the maps `i`, `i*`
/// carry values correctly on the given names, with equal rank-`k` models.
pub fn full_quotient_report(
    qs: &QuotientSystem,
    t: &TwoStep,
    upper_names: &[PName],
    iteration_names: &[PName],
    k: usize,
) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let s1 = &qs.upper;
    let qf = &qs.forcing;
    for (gi, &gen) in s1.generics().iter().enumerate() {
        let g = GenericFilter { conds: gen, atom: s1.atoms()[gi], symmetric: true };
        let canon = match canonical_quotient_generic(qf, &g) {
            Ok(c) => c,
            Err(e) => {
                report.violations.push(format!("(a) at generic {gi}: {e}"));
                continue;
            }
        };
        let ev = &qf.evaluated[canon.base_generic];
        if !ev.poset.is_filter(canon.k) || !meets_every_dense(&ev.poset, canon.k) || canon.domain != gen {
            report.violations.push(format!("(b) at generic {gi}: the canonical filter is not generic"));
            continue;
        }
        let Some(kg) = canon.as_generic(qf) else {
            report.violations.push(format!("(b) at generic {gi}: the canonical filter is not a cone"));
            continue;
        };
        let composed = crate::iteration::compose_generic(t, &canon.g0, &kg)?;
        for x in upper_names {
            if i_map(qs, t, x)?.eval(composed.conds) != x.eval(gen) {
                report.violations.push(format!("(c) at generic {gi}: i changes the value of a name"));
                break;
            }
        }
        for x in iteration_names {
            if x.eval(composed.conds) != i_star_map(qs, t, x)?.eval(gen) {
                report.violations.push(format!("(c) at generic {gi}: i* changes the value of a name"));
                break;
            }
        }
        let ci = t.system().generics().iter().position(|&c| c == composed.conds).expect("composed generic is listed");
        if s1.model_at(gi, k)? != t.system().model_at(ci, k)? {
            report.violations.push(format!("(c) at generic {gi}: the rank-{k} models differ"));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{a_dot, p3, sfree, ssym, striv};
    use crate::guard::Guards;
    use crate::iteration::SystemName;
    use crate::symmetric::is_hs;

    fn guards(poset: usize) -> Guards {
        Guards { poset, ..Guards::default() }
    }

    /// `P3` with an extra condition `c < 1` incompatible with `a` and `b`.
    fn p3_plus() -> Poset {
        Poset::new(&["1", "a", "b", "c"], &[("a", "1"), ("b", "1"), ("c", "1")], "1").unwrap()
    }

    fn trivial_over(s: &SymSystem) -> SymSystem {
        SymSystem::from_generators((**s.poset()).clone(), &[], &[vec![]], *s.guards()).unwrap()
    }

    #[test]
    fn complete_subsystem_examples() {
        let id = identity_embedding(&p3());
        for s in [striv(), ssym(), sfree()] {
            assert!(is_complete_subsystem(&s, &trivial_over(&s), &id).unwrap());
        }
        // The restriction clause decides between Ssym and Striv.
        assert!(is_complete_subsystem(&ssym(), &striv(), &id).unwrap());
        let report = complete_subsystem_report(&striv(), &ssym(), &id).unwrap();
        assert!(report.violations.iter().all(|v| v.starts_with("clause 2")), "{report:?}");
        assert!(!report.is_valid());
        for (s0, s1) in [(striv(), striv()), (ssym(), ssym())] {
            let t = two_step(&s0, &SystemName::check(&s0, &s1)).unwrap();
            assert!(is_complete_subsystem(&s0, t.system(), &two_step_embedding(&t)).unwrap());
        }
    }

    #[test]
    fn incomplete_instance() {
        let q = p3_plus();
        let emb = identity_embedding(&p3());
        assert!(is_subforcing(&p3(), &q, &emb));
        assert!(!is_symmetrically_complete(&striv(), &q, &emb).unwrap());
        let g = striv().group().clone();
        assert_eq!(h_reduction(&p3(), &q, &emb, &g, &g.whole(), 3).unwrap(), None);
        assert!(quotient_forcing(&striv(), &q, &emb, &RespectBasis::default_for(&striv(), 1).unwrap()).is_err());
        // Not a subforcing: `a` and `b` become compatible.
        let joined = Poset::new(&["1", "a", "b", "d"], &[("a", "1"), ("b", "1"), ("d", "a"), ("d", "b")], "1").unwrap();
        assert!(!is_subforcing(&p3(), &joined, &emb));
        assert!(h_reduction(&p3(), &joined, &emb, &g, &g.whole(), 0).is_err());
    }

    #[test]
    fn reduction_examples() {
        let p = p3();
        let emb = identity_embedding(&p);
        let g2 = ssym().group().clone();
        // τ(b) = a is compatible with a, so the top already reduces a.
        assert_eq!(h_reduction(&p, &p, &emb, &g2, &g2.whole(), 1).unwrap(), Some(0));
        assert_eq!(h_reduction(&p, &p, &emb, &g2, &g2.trivial(), 1).unwrap(), Some(1));
    }

    #[test]
    fn diagrams() {
        let s = ssym();
        let d = respect_diagram(&s, &a_dot()).unwrap();
        let id = s.group().identity();
        assert_eq!(d.pairs(), vec![(0, id), (1, id), (2, id)]);
        let check = check_name(0, &HSet::ordinal(2));
        assert_eq!(respect_diagram(&s, &check).unwrap().len(), 3 * s.group().order());
        // The profile computation agrees with the recursion, and P × sym(x) ⊆ R(x).
        for x in crate::symmetric::enumerate_hs(&sfree(), 1).unwrap().iter() {
            let d = respect_diagram(&sfree(), x).unwrap();
            assert_eq!(d, profile_diagram(&sfree(), &sfree().profile(x)));
            for pi in crate::symmetric::sym_group(&sfree(), x).iter() {
                assert_eq!(d.conditions_for(pi), sfree().poset().all());
            }
        }
    }

    #[test]
    fn bases() {
        for s in [striv(), ssym(), sfree()] {
            let basis = RespectBasis::default_for(&s, 2).unwrap();
            assert_eq!(basis.names(), &[PName::empty()]);
            assert!(respect_basis_check(&s, RespectBasis::hs_fragment(&s, 1).unwrap().names(), 2).unwrap());
        }
        // {ȧ} alone is not closed under τ; its closure {ȧ, ḃ} is a basis.
        let report = respect_basis_report(&sfree(), &[a_dot()], 1).unwrap();
        assert_eq!(report.violations, vec!["clause 2: not closed under the group".to_string()]);
        let ab = RespectBasis::closure_of(&sfree(), &[a_dot()], "cohen-style").unwrap();
        assert_eq!(ab.len(), 2);
        assert!(respect_basis_check(&sfree(), ab.names(), 2).unwrap());
    }

    fn forcing_for(s: &SymSystem, basis: &RespectBasis) -> QuotientForcing {
        quotient_forcing(s, s.poset(), &identity_embedding(s.poset()), basis).unwrap()
    }

    #[test]
    fn psi_tables() {
        let s = striv();
        let qf = forcing_for(&s, &RespectBasis::default_for(&s, 1).unwrap());
        assert!(qf.psi(0, 0, &[]));
        for g in 0..s.generics().len() {
            let ev = qf.evaluated(g);
            // Directed: every two conditions have a common extension.
            assert!(ev.conds().iter().enumerate().all(|(i, _)| (0..ev.len()).all(|j| ev.poset().compat(i, j))));
        }
        let s = ssym();
        let qf = forcing_for(&s, &RespectBasis::default_for(&s, 1).unwrap());
        assert!(qf.entries().iter().any(|e| e.p == 1 && e.r == 2));
        assert!(!ev_directed(qf.evaluated(0)));
        for qf in [qf, forcing_for(&sfree(), &RespectBasis::closure_of(&sfree(), &[a_dot()], "ab").unwrap())] {
            assert!(qf.name_is_invariant());
            let s = qf.base().clone();
            let entries: BTreeSet<&PsiEntry> = qf.entries().iter().collect();
            for pi in 0..s.group().order() {
                for e in qf.entries() {
                    let mut pairs: Vec<(usize, usize)> = e.pairs.iter().map(|&(i, j)| (i, qf.basis().act(pi, j))).collect();
                    pairs.sort();
                    let moved = PsiEntry { p: s.group().element(pi).apply(e.p), r: e.r, pairs };
                    assert!(entries.contains(&moved));
                }
            }
            for (g, &gen) in s.generics().iter().enumerate() {
                let direct: BTreeSet<QuotientCond> = qf.evaluated(g).conds().iter().cloned().collect();
                let read: BTreeSet<QuotientCond> =
                    qf.name().eval(gen).elems().iter().map(|v| qf.read_value(v).unwrap()).collect();
                assert_eq!(read, direct);
                assert_eq!(qf.evaluated_by_psi_prime(g), direct);
            }
        }
    }

    fn ev_directed(ev: &EvaluatedQuotient) -> bool {
        (0..ev.len()).all(|i| (0..ev.len()).all(|j| ev.poset().compat(i, j)))
    }

    #[test]
    fn quotient_systems() {
        let id = identity_embedding(&p3());
        // Over the trivial supersystem the quotient has trivial symmetry.
        let s0 = ssym();
        let basis = RespectBasis::default_for(&s0, 1).unwrap();
        let qs = quotient_system(&s0, &striv(), &id, &basis).unwrap();
        for g in 0..2 {
            assert_eq!(qs.name().at(g).group().order(), 1);
        }
        // Over itself, the quotient adds nothing new to a rigid system.
        let qs = quotient_system(&striv(), &striv(), &id, &RespectBasis::default_for(&striv(), 1).unwrap()).unwrap();
        assert!(ev_directed(qs.forcing().evaluated(0)));
        let qs = quotient_system(&ssym(), &sfree(), &id, &basis).unwrap();
        assert_eq!(qs.elements().len(), 2);
        // ψ-membership is invariant under the quotient action.
        let qf = qs.forcing();
        for k in 0..qs.elements().len() {
            let sigma = qs.upper().group().element(qs.elements()[k]).clone();
            let rho = qs.restriction_of(k);
            for p in p3().conds() {
                for r in p3().conds() {
                    for pairs in [vec![], vec![(0, 0)]] {
                        let moved: Vec<(usize, usize)> = pairs.iter().map(|&(i, j)| (qf.basis().act(rho, i), j)).collect();
                        assert_eq!(qf.psi(p, r, &pairs), qf.psi(p, sigma.apply(r), &moved));
                    }
                }
            }
        }
        assert!(quotient_system(&striv(), &ssym(), &id, &basis).is_err());
    }

    #[test]
    fn canonical_generics() {
        for (s0, s1) in [(striv(), striv()), (ssym(), striv()), (ssym(), sfree()), (sfree(), striv())] {
            let qs = quotient_system(&s0, &s1, &identity_embedding(&p3()), &RespectBasis::default_for(&s0, 1).unwrap()).unwrap();
            for (gi, &gen) in s1.generics().iter().enumerate() {
                let g = GenericFilter { conds: gen, atom: s1.atoms()[gi], symmetric: true };
                let k = canonical_quotient_generic(qs.forcing(), &g).unwrap();
                let poset = qs.forcing().evaluated(k.base_generic).poset().clone();
                assert!(poset.is_filter(k.k));
                assert!(meets_every_dense(&poset, k.k));
                assert_eq!(k.domain, gen);
                assert!(k.as_generic(qs.forcing()).is_some());
            }
        }
    }

    #[test]
    fn homogeneity() {
        for (s, basis) in [
            (ssym(), RespectBasis::default_for(&ssym(), 1).unwrap()),
            (sfree(), RespectBasis::closure_of(&sfree(), &[a_dot()], "ab").unwrap()),
        ] {
            let qf = forcing_for(&s, &basis);
            for g in 0..s.generics().len() {
                let ev = qf.evaluated(g);
                for c0 in 0..ev.len() {
                    for c1 in 0..ev.len() {
                        let sigma = homogeneity_witness(&qf, g, c0, c1).unwrap();
                        assert!(ev.poset().compat(sigma.apply(c0), c1));
                        crate::perm::check_automorphism(ev.poset(), &sigma).unwrap();
                        if c0 == c1 {
                            assert!(ev.poset().compat(c0, c1));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn full_quotient() {
        let id = identity_embedding(&p3());
        for (s0, s1) in [(ssym(), striv()), (ssym(), sfree()), (striv(), striv())] {
            let s0 = s0.with_guards(guards(128));
            let basis = RespectBasis::default_for(&s0, 1).unwrap();
            let qs = quotient_system(&s0, &s1.with_guards(guards(128)), &id, &basis).unwrap();
            let t = quotient_iteration(&qs).unwrap();
            let upper: Vec<PName> = crate::symmetric::enumerate_hs(&s1, 1).unwrap().to_vec();
            for x in &upper {
                assert!(is_hs(t.system(), &i_map(&qs, &t, x).unwrap()));
            }
            let n = t.system().poset().len();
            let e = PName::empty();
            let star: Vec<PName> = (0..n).map(|c| PName::new([(c, e.clone())])).collect();
            let report = full_quotient_report(&qs, &t, &upper, &star, 2).unwrap();
            assert!(report.is_valid(), "{report:?}");
        }
    }
}
