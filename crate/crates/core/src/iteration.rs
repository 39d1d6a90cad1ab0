//! Two-step iterations `S0 * Ṡ1`, products, name witnesses and reduced iterations,
//! finite iterations with supports, and the translations between a two-step system
//! and its factors.
//!
//! Over a finite base every generic lies in the ground model, so an `S0`-name for a
//! system is determined by its value at each generic; [`SystemName`] stores that
//! family. In the same way a closed name for a second-stage condition is a choice of
//! condition at each generic (a *profile*), and a name for a second-stage automorphism
//! is a choice of group element at each generic (a *fiber*).

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fixtures::point_system;
use crate::forcing::GenericFilter;
use crate::guard::Guards;
use crate::hset::HSet;
use crate::name::{apply, decode, pair_name, PName};
use crate::order::{bit, members, Cond, Poset};
use crate::perm::{NormalFilter, Perm, PermGroup, Subgroup};
use crate::symmetric::mixture_name;
use crate::system::{SymSystem, ValidationReport};

/// An `S0`-name for a symmetric system, as its value at each generic of `S0`.
#[derive(Debug, Clone)]
pub struct SystemName {
    family: Vec<Arc<SymSystem>>,
}

impl SystemName {
    /// `Š1`: the same system at every generic.
    pub fn check(s0: &SymSystem, s1: &SymSystem) -> SystemName {
        let s1 = Arc::new(s1.clone());
        SystemName { family: vec![s1; s0.generics().len()] }
    }

    /// A name given by its values; fails unless every automorphism of `S0` fixes it,
    /// i.e. the value at `πG` is the value at `G`.
    pub fn from_family(s0: &SymSystem, family: Vec<SymSystem>) -> Result<SystemName> {
        let name = SystemName { family: family.into_iter().map(Arc::new).collect() };
        if let Some(v) = name.validate(s0).violations.first() {
            return Err(Error::Precondition(v.clone()));
        }
        Ok(name)
    }

    pub fn at(&self, g: usize) -> &SymSystem {
        &self.family[g]
    }

    pub fn family(&self) -> &[Arc<SymSystem>] {
        &self.family
    }

    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }

    /// The stabilizer requirement `sym(Ṡ1) = G0`. Each value is a constructed, hence
    /// valid, system, so being forced to be a symmetric system holds at every generic.
    pub fn validate(&self, s0: &SymSystem) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.family.len() != s0.generics().len() {
            report.violations.push(format!(
                "{} values for {} generics",
                self.family.len(),
                s0.generics().len()
            ));
            return report;
        }
        for (g, s) in self.family.iter().enumerate() {
            if let Some(v) = s.validate().violations.first() {
                report.violations.push(format!("value at generic {g}: {v}"));
            }
        }
        for pi in 0..s0.group().order() {
            for g in 0..self.family.len() {
                if *self.family[s0.act_generic(pi, g)] != *self.family[g] {
                    report.violations.push(format!("stabilizer violation: element {pi} moves the value at generic {g}"));
                    return report;
                }
            }
        }
        report
    }
}

/// A pair `(π0, π̇1)`: an element of `G0` and a second-stage element at each generic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair {
    pub base: usize,
    pub fiber: Vec<usize>,
}

/// The label of a per-generic choice: the common label, or all of them.
fn profile_label(stage: &SystemName, f: &[Cond]) -> String {
    let labels: Vec<&str> = f.iter().enumerate().map(|(g, &q)| stage.at(g).poset().label(q)).collect();
    if labels.windows(2).all(|w| w[0] == w[1]) {
        labels.first().copied().unwrap_or("").to_string()
    } else {
        format!("[{}]", labels.join("|"))
    }
}

/// Every function choosing an index below `sizes[g]` at each `g`, lexicographically.
fn all_choices(sizes: &[usize], limit: u128) -> Result<Vec<Vec<usize>>> {
    let total = sizes.iter().fold(1u128, |acc, &s| acc.saturating_mul(s as u128));
    if total > limit {
        return Err(Error::GuardExceeded { what: "per-generic choices", size: total, limit });
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut cur = vec![0; sizes.len()];
    if sizes.iter().any(|&s| s == 0) {
        return Ok(out);
    }
    loop {
        out.push(cur.clone());
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < sizes[i] {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// A two-step iteration `S0 * Ṡ1`, or a reduced iteration `S0 ⋆ Ṡ1` when built from a
/// name witness.
#[derive(Debug)]
pub struct TwoStep {
    system: SymSystem,
    base: Arc<SymSystem>,
    stage: SystemName,
    seconds: Vec<Vec<Cond>>,
    second_index: HashMap<Vec<Cond>, usize>,
    conds: Vec<(Cond, usize)>,
    cond_index: HashMap<(Cond, usize), Cond>,
    pairs: Vec<Pair>,
    pair_index: HashMap<Pair, usize>,
    pair_element: Vec<usize>,
    element_pair: Vec<usize>,
    /// Second-stage subgroup families whose pair subgroups generate the filter.
    filter_fibers: Vec<Vec<Subgroup>>,
}

impl TwoStep {
    fn build(
        base: Arc<SymSystem>,
        stage: SystemName,
        seconds: Vec<Vec<Cond>>,
        fibers: Vec<Vec<usize>>,
        filter_fibers: Vec<Vec<Subgroup>>,
        guards: Guards,
    ) -> Result<TwoStep> {
        let p0 = base.poset().clone();
        guards.check_poset(p0.len().saturating_mul(seconds.len()))?;
        let second_index: HashMap<Vec<Cond>, usize> = seconds.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
        if second_index.len() != seconds.len() {
            return Err(Error::Precondition("second-stage names are not pairwise distinct".into()));
        }
        let mut conds = Vec::with_capacity(p0.len() * seconds.len());
        let mut labels = Vec::with_capacity(conds.capacity());
        for p in p0.conds() {
            for (s, f) in seconds.iter().enumerate() {
                conds.push((p, s));
                labels.push(format!("({},{})", p0.label(p), profile_label(&stage, f)));
            }
        }
        let cond_index: HashMap<(Cond, usize), Cond> = conds.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let top_profile: Vec<Cond> = (0..stage.len()).map(|g| stage.at(g).top()).collect();
        let top_second = *second_index
            .get(&top_profile)
            .ok_or_else(|| Error::Precondition("the trivial second-stage condition is missing".into()))?;
        let top = cond_index[&(p0.top(), top_second)];
        let leq = |i: Cond, j: Cond| {
            let ((p, s), (q, t)) = (conds[i], conds[j]);
            p0.leq(p, q)
                && members(base.generics_of(p)).all(|g| stage.at(g).poset().leq(seconds[s][g], seconds[t][g]))
        };
        let poset = Arc::new(Poset::from_fn(labels, top, leq)?);

        let g0 = base.group();
        let mut pairs = Vec::with_capacity(g0.order() * fibers.len());
        for b in 0..g0.order() {
            for phi in &fibers {
                pairs.push(Pair { base: b, fiber: phi.clone() });
            }
        }
        guards.check_group(pairs.len())?;
        let mut step = TwoStep {
            system: point_system(),
            base,
            stage,
            seconds,
            second_index,
            conds,
            cond_index,
            pair_index: pairs.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect(),
            pairs,
            pair_element: Vec::new(),
            element_pair: Vec::new(),
            filter_fibers: Vec::new(),
        };
        let perms: Vec<Perm> = step.pairs.iter().map(|pair| step.pair_perm(pair)).collect::<Result<_>>()?;
        let mut distinct = perms.clone();
        distinct.sort();
        distinct.dedup();
        let group = Arc::new(PermGroup::from_elements(poset.len(), distinct.clone(), distinct)?);
        step.pair_element = perms.iter().map(|p| group.index_of(p).expect("listed element")).collect();
        step.element_pair = vec![usize::MAX; group.order()];
        for (i, &e) in step.pair_element.iter().enumerate().rev() {
            step.element_pair[e] = i;
        }

        let k0 = step.base.filter().core().clone();
        let mut generators = Vec::new();
        for psi in filter_fibers {
            let invariant = k0.iter().all(|pi| (0..psi.len()).all(|g| psi[step.base.act_generic(pi, g)] == psi[g]));
            if invariant {
                generators.push(step.pair_subgroup(&group, &k0, &psi));
                step.filter_fibers.push(psi);
            }
        }
        if generators.is_empty() {
            return Err(Error::Precondition("no filter generator has a symmetric second coordinate".into()));
        }
        let filter = NormalFilter::new(group, generators)?;
        step.system = SymSystem::new(poset, filter, guards)?;
        Ok(step)
    }

    /// `{(π0, π̇1) : π0 ∈ h0, π̇1(G) ∈ ψ(G) for all G}` as element indices of `group`.
    fn pair_subgroup(&self, group: &PermGroup, h0: &Subgroup, psi: &[Subgroup]) -> Subgroup {
        let elems = self
            .pairs
            .iter()
            .enumerate()
            .filter(|(_, pair)| h0.contains(pair.base) && pair.fiber.iter().zip(psi).all(|(&x, h)| h.contains(x)))
            .map(|(i, _)| self.pair_element[i]);
        Subgroup::from_iter(group.order(), elems)
    }

    /// The subgroup `(H0, Ḣ1)` of this system's group.
    pub fn subgroup(&self, h0: &Subgroup, psi: &[Subgroup]) -> Subgroup {
        self.pair_subgroup(self.system.group(), h0, psi)
    }

    pub fn system(&self) -> &SymSystem {
        &self.system
    }

    pub fn base(&self) -> &SymSystem {
        &self.base
    }

    pub fn stage(&self) -> &SystemName {
        &self.stage
    }

    /// The closed second-stage names in use, as profiles.
    pub fn seconds(&self) -> &[Vec<Cond>] {
        &self.seconds
    }

    /// `(p, index of q̇)` for a condition.
    pub fn split(&self, c: Cond) -> (Cond, &[Cond]) {
        let (p, s) = self.conds[c];
        (p, &self.seconds[s])
    }

    pub fn locate(&self, p: Cond, profile: &[Cond]) -> Option<Cond> {
        let s = *self.second_index.get(profile)?;
        self.cond_index.get(&(p, s)).copied()
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn element_of(&self, pair: &Pair) -> Option<usize> {
        self.pair_index.get(pair).map(|&i| self.pair_element[i])
    }

    /// A pair inducing a group element.
    pub fn pair_of(&self, element: usize) -> &Pair {
        &self.pairs[self.element_pair[element]]
    }

    pub fn filter_fibers(&self) -> &[Vec<Subgroup>] {
        &self.filter_fibers
    }

    fn second_group(&self, g: usize) -> &PermGroup {
        self.stage.at(g).group()
    }

    /// `(π0, π̇1)(p, q̇) = (π0(p), π̇1(π0(q̇)))`, pointwise: at `G` the new second
    /// coordinate is `π̇1(G)` applied to `q̇(π0⁻¹G)`.
    pub fn act(&self, pair: &Pair, c: Cond) -> Option<Cond> {
        let (p, s) = self.conds[c];
        let g0 = self.base.group();
        let inv = g0.inv(pair.base);
        let moved: Vec<Cond> = (0..self.stage.len())
            .map(|g| {
                let q = self.seconds[s][self.base.act_generic(inv, g)];
                self.second_group(g).element(pair.fiber[g]).apply(q)
            })
            .collect();
        self.locate(g0.element(pair.base).apply(p), &moved)
    }

    pub fn pair_perm(&self, pair: &Pair) -> Result<Perm> {
        let images = (0..self.conds.len())
            .map(|c| {
                self.act(pair, c).ok_or_else(|| Error::Precondition("second-stage names not closed under the action".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Perm::from_images(images)
    }

    /// `(π0 ∘ σ0, π̇1 ∘ π0(σ̇1))`.
    pub fn compose_pair(&self, a: &Pair, b: &Pair) -> Pair {
        let g0 = self.base.group();
        let inv = g0.inv(a.base);
        let fiber = (0..self.stage.len())
            .map(|g| self.second_group(g).mul(a.fiber[g], b.fiber[self.base.act_generic(inv, g)]))
            .collect();
        Pair { base: g0.mul(a.base, b.base), fiber }
    }

    /// `(σ0⁻¹, σ0⁻¹(σ̇1⁻¹))`.
    pub fn invert_pair(&self, b: &Pair) -> Pair {
        let g0 = self.base.group();
        let fiber = (0..self.stage.len())
            .map(|g| self.second_group(g).inv(b.fiber[self.base.act_generic(b.base, g)]))
            .collect();
        Pair { base: g0.inv(b.base), fiber }
    }

    /// `σ̄ π̄ σ̄⁻¹ = (σ0 π0 σ0⁻¹, σ̇1 ∘ σ0(π̇1) ∘ (σ0 π0 σ0⁻¹)(σ̇1)⁻¹)`.
    pub fn conjugate_pair(&self, sigma: &Pair, pi: &Pair) -> Pair {
        let g0 = self.base.group();
        let base = g0.conj(sigma.base, pi.base);
        let (sinv, binv) = (g0.inv(sigma.base), g0.inv(base));
        let fiber = (0..self.stage.len())
            .map(|g| {
                let h = self.second_group(g);
                let left = h.mul(sigma.fiber[g], pi.fiber[self.base.act_generic(sinv, g)]);
                h.mul(left, h.inv(sigma.fiber[self.base.act_generic(binv, g)]))
            })
            .collect();
        Pair { base, fiber }
    }
}

/// Keeps the per-generic choices fixed by the base core, i.e. those realised by
/// hereditarily symmetric names.
fn core_invariant<T: PartialEq>(s0: &SymSystem, choices: Vec<Vec<T>>) -> Vec<Vec<T>> {
    let core = s0.filter().core();
    choices
        .into_iter()
        .filter(|f| core.iter().all(|k| (0..f.len()).all(|g| f[s0.act_generic(k, g)] == f[g])))
        .collect()
}

/// The full two-step iteration: every closed symmetric second-stage name, every pair
/// with a symmetric fiber, and the filter generated by `(H0, Ḣ1)` with `H0 ≤ sym(Ḣ1)`.
/// Its least member is `(K0, K̇1)` for the cores `K0`, `K̇1`.
pub fn two_step(s0: &SymSystem, stage: &SystemName) -> Result<TwoStep> {
    if let Some(v) = stage.validate(s0).violations.first() {
        return Err(Error::Precondition(v.clone()));
    }
    let guards = *s0.guards();
    let sizes: Vec<usize> = stage.family().iter().map(|s| s.poset().len()).collect();
    let seconds = core_invariant(s0, all_choices(&sizes, guards.poset as u128)?);
    let orders: Vec<usize> = stage.family().iter().map(|s| s.group().order()).collect();
    let fibers = core_invariant(s0, all_choices(&orders, guards.group as u128)?);
    let cores: Vec<Subgroup> = stage.family().iter().map(|s| s.filter().core().clone()).collect();
    TwoStep::build(Arc::new(s0.clone()), stage.clone(), seconds, fibers, vec![cores], guards)
}

/// `S0 × S1`. Condition `(p, q)` has index `p · |P1| + q`, and group element `(i, j)`
/// acts as `π_i` on the first and `σ_j` on the second coordinate.
pub fn product(s0: &SymSystem, s1: &SymSystem) -> Result<SymSystem> {
    let (a, b) = (s0.poset(), s1.poset());
    let n1 = b.len();
    let guards = *s0.guards();
    guards.check_poset(a.len() * n1)?;
    let labels: Vec<String> =
        a.conds().flat_map(|p| b.conds().map(move |q| (p, q))).map(|(p, q)| format!("({},{})", a.label(p), b.label(q))).collect();
    let poset = Poset::from_fn(labels, a.top() * n1 + b.top(), |i, j| a.leq(i / n1, j / n1) && b.leq(i % n1, j % n1))?;
    let (g0, g1) = (s0.group(), s1.group());
    guards.check_group(g0.order() * g1.order())?;
    let mut perms = Vec::with_capacity(g0.order() * g1.order());
    for x in g0.elements() {
        for y in g1.elements() {
            perms.push(Perm::from_images((0..poset.len()).map(|c| x.apply(c / n1) * n1 + y.apply(c % n1)).collect())?);
        }
    }
    let core: Vec<Perm> = s0
        .filter()
        .core()
        .iter()
        .flat_map(|i| s1.filter().core().iter().map(move |j| i * g1.order() + j))
        .map(|k| perms[k].clone())
        .collect();
    let group = Arc::new(PermGroup::from_elements(poset.len(), perms.clone(), perms)?);
    let core = group.subgroup_of(&core)?;
    SymSystem::with_core(Arc::new(poset), group, core, guards)
}

/// The factors of a generic of a two-step iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factored {
    /// Index of `G0` among the generics of `S0`.
    pub base_generic: usize,
    pub g0: GenericFilter,
    /// Generic for the second-stage system at `G0`.
    pub g1: GenericFilter,
}

fn generic_index(system: &SymSystem, g: &GenericFilter) -> Result<usize> {
    system
        .generics()
        .iter()
        .position(|&c| c == g.conds)
        .ok_or_else(|| Error::Precondition("not a generic filter of the system".into()))
}

/// `G ↦ (G0, G1)` with `G0 = dom G` and `G1 = {q̇^{G0} : (p, q̇) ∈ G}`.
pub fn factor_generic(t: &TwoStep, g: &GenericFilter) -> Result<Factored> {
    let gi = generic_index(&t.system, g)?;
    let (m, f) = t.split(t.system.atoms()[gi]);
    let base = &t.base;
    let b = members(base.generics_of(m)).next().expect("a minimal condition lies in a generic");
    let g0 = GenericFilter { conds: base.generics()[b], atom: base.atoms()[b], symmetric: true };
    let s1 = t.stage.at(b);
    let q = f[b];
    let g1 = GenericFilter { conds: s1.poset().above(q), atom: q, symmetric: true };
    generic_index(s1, &g1)?;
    Ok(Factored { base_generic: b, g0, g1 })
}

/// `G0 * G1 = {(p, q̇) : p ∈ G0, q̇^{G0} ∈ G1}`.
pub fn compose_generic(t: &TwoStep, g0: &GenericFilter, g1: &GenericFilter) -> Result<GenericFilter> {
    let b = generic_index(&t.base, g0)?;
    generic_index(t.stage.at(b), g1)?;
    let conds = (0..t.conds.len())
        .filter(|&c| {
            let (p, f) = t.split(c);
            g0.conds & bit(p) != 0 && g1.conds & bit(f[b]) != 0
        })
        .fold(0, |acc, c| acc | bit(c));
    let candidate = GenericFilter { conds, atom: 0, symmetric: true };
    let gi = generic_index(&t.system, &candidate)?;
    Ok(GenericFilter { conds, atom: t.system.atoms()[gi], symmetric: true })
}

/// The `S0`-name whose value at `G` codes `f(G)`.
fn coded_second(t: &TwoStep, f: &[Cond]) -> Result<PName> {
    let profile: Vec<HSet> = f.iter().map(|&q| HSet::code(q as u64)).collect();
    mixture_name(&t.base, &profile)
}

/// `[ẋ] = {(p, (q̇, [ẏ])•) : ((p, q̇), ẏ) ∈ ẋ}`: an `S0`-name whose value at `G0` codes an
/// `Ṡ1^{G0}`-name, with second-stage conditions as Ackermann codes (see [`open_bracket`]).
pub fn bracket(t: &TwoStep, x: &PName) -> Result<PName> {
    fn go(t: &TwoStep, x: &PName, memo: &mut HashMap<u32, PName>, coded: &mut HashMap<usize, PName>) -> Result<PName> {
        if let Some(y) = memo.get(&x.id()) {
            return Ok(y.clone());
        }
        let top = t.base.top();
        let mut entries = Vec::with_capacity(x.len());
        for (c, y) in x.entries() {
            if *c >= t.conds.len() {
                return Err(Error::UnknownCondition(c.to_string()));
            }
            let (p, s) = t.conds[*c];
            let q = match coded.get(&s) {
                Some(q) => q.clone(),
                None => {
                    let q = coded_second(t, &t.seconds[s])?;
                    coded.insert(s, q.clone());
                    q
                }
            };
            let inner = go(t, y, memo, coded)?;
            entries.push((p, pair_name(top, &q, &inner)));
        }
        let out = PName::new(entries);
        memo.insert(x.id(), out.clone());
        Ok(out)
    }
    go(t, x, &mut HashMap::new(), &mut HashMap::new())
}

/// `[ẋ]^{G0}` read back as a name over the second-stage poset at generic `b` of `S0`.
pub fn open_bracket(t: &TwoStep, bx: &PName, b: usize) -> Result<PName> {
    let value = bx.eval(t.base.generics()[b]);
    decode(&value).ok_or_else(|| Error::Precondition("value does not code a name".into()))
}

/// Reads a bullet Kuratowski pair `{{a}•, {a, b}•}•` over top `top`.
fn read_pair(top: Cond, e: &PName) -> Option<(PName, PName)> {
    let parts: Vec<&PName> = e.entries().iter().map(|(c, y)| (*c == top).then_some(y)).collect::<Option<_>>()?;
    let bullets = |y: &PName| -> Option<Vec<PName>> {
        y.entries().iter().map(|(c, z)| (*c == top).then(|| z.clone())).collect()
    };
    match parts.as_slice() {
        [one] => match bullets(one)?.as_slice() {
            [a] => Some((a.clone(), a.clone())),
            _ => None,
        },
        [x, y] => {
            let (xs, ys) = (bullets(x)?, bullets(y)?);
            let (single, double) = if xs.len() == 1 { (xs, ys) } else { (ys, xs) };
            if single.len() != 1 || double.len() != 2 || !double.contains(&single[0]) {
                return None;
            }
            let a = single[0].clone();
            let b = double.iter().find(|z| **z != a)?.clone();
            Some((a, b))
        }
        _ => None,
    }
}

/// `]ẏ[ = {((p, q̇), ]ż[) : p ⊩ (q̇, ż) ∈ ẏ}`. Candidates `(q̇, ż)` are the pairs listed in
/// `ẏ`: an entry `(p, (ȧ, ż)•)` contributes `((p', q̇), ]ż[)` for every `p' ≤ p` and every
/// second-stage name `q̇` whose code agrees with `ȧ` at each generic through `p'`.
pub fn unbracket(t: &TwoStep, y: &PName) -> Result<PName> {
    fn go(t: &TwoStep, y: &PName, memo: &mut HashMap<u32, PName>) -> Result<PName> {
        if let Some(x) = memo.get(&y.id()) {
            return Ok(x.clone());
        }
        let base = &t.base;
        let p0 = base.poset();
        let mut entries = Vec::new();
        for (p, e) in y.entries() {
            let (a, z) = read_pair(base.top(), e)
                .ok_or_else(|| Error::Precondition("entry is not a bullet pair of names".into()))?;
            let inner = go(t, &z, memo)?;
            let values: Vec<HSet> = base.generics().iter().map(|&g| a.eval(g)).collect();
            for (c, &(q, s)) in t.conds.iter().enumerate() {
                if !p0.leq(q, *p) {
                    continue;
                }
                let f = &t.seconds[s];
                if members(base.generics_of(q)).all(|g| values[g] == HSet::code(f[g] as u64)) {
                    entries.push((c, inner.clone()));
                }
            }
        }
        let out = PName::new(entries);
        memo.insert(y.id(), out.clone());
        Ok(out)
    }
    go(t, y, &mut HashMap::new())
}

/// `s(H̄, ẋ) = ⋃_{σ̄ ∈ H̄} σ̄(ẋ)` for a subgroup `H̄` of the system's group.
pub fn symmetrize(system: &SymSystem, h: &Subgroup, x: &PName) -> PName {
    let g = system.group();
    let mut entries = Vec::new();
    for e in h.iter() {
        entries.extend(apply(g.element(e), x).entries().iter().cloned());
    }
    PName::new(entries)
}

/// Three lists of `S0`-names: second-stage conditions, automorphisms and filter members,
/// each given by its value at every generic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameWitness {
    pub conditions: Vec<Vec<Cond>>,
    pub automorphisms: Vec<Vec<usize>>,
    pub subgroups: Vec<Vec<Subgroup>>,
}

impl NameWitness {
    /// `({p̌}, {π̌}, {Ȟ})` for a system of the ground model.
    pub fn check_names(s0: &SymSystem, s1: &SymSystem) -> NameWitness {
        let n = s0.generics().len();
        let g1 = s1.group();
        NameWitness {
            conditions: s1.poset().conds().map(|q| vec![q; n]).collect(),
            automorphisms: (0..g1.order()).map(|e| vec![e; n]).collect(),
            subgroups: g1.subgroups_containing(s1.filter().core()).into_iter().map(|h| vec![h; n]).collect(),
        }
    }

    /// Every symmetric per-generic choice: closed condition names, automorphism names and
    /// filter-member names fixed by the base core.
    pub fn all_names(s0: &SymSystem, stage: &SystemName) -> Result<NameWitness> {
        let guards = s0.guards();
        let sizes: Vec<usize> = stage.family().iter().map(|s| s.poset().len()).collect();
        let orders: Vec<usize> = stage.family().iter().map(|s| s.group().order()).collect();
        let members: Vec<Vec<Subgroup>> =
            stage.family().iter().map(|s| s.group().subgroups_containing(s.filter().core())).collect();
        let counts: Vec<usize> = members.iter().map(Vec::len).collect();
        Ok(NameWitness {
            conditions: core_invariant(s0, all_choices(&sizes, guards.poset as u128)?),
            automorphisms: core_invariant(s0, all_choices(&orders, guards.group as u128)?),
            subgroups: core_invariant(
                s0,
                all_choices(&counts, guards.names)?
                    .into_iter()
                    .map(|c| c.iter().enumerate().map(|(g, &i)| members[g][i].clone()).collect())
                    .collect(),
            ),
        })
    }
}

fn shift<T: Clone>(s0: &SymSystem, pi: usize, f: &[T]) -> Vec<T> {
    let inv = s0.group().inv(pi);
    (0..f.len()).map(|g| f[s0.act_generic(inv, g)].clone()).collect()
}

/// Checks the four clauses of a name witness; clause (4) covers the schemas identity,
/// composition, inverse, conjugation and intersection.
pub fn validate_name_witness(s0: &SymSystem, stage: &SystemName, w: &NameWitness) -> ValidationReport {
    let mut report = stage.validate(s0);
    if !report.is_valid() {
        return report;
    }
    let n = s0.generics().len();
    let mut v = |msg: String| report.violations.push(msg);
    let shapes_ok = w.conditions.iter().all(|f| f.len() == n && f.iter().enumerate().all(|(g, &q)| q < stage.at(g).poset().len()))
        && w.automorphisms.iter().all(|f| f.len() == n && f.iter().enumerate().all(|(g, &e)| e < stage.at(g).group().order()))
        && w.subgroups.iter().all(|f| f.len() == n && f.iter().enumerate().all(|(g, h)| stage.at(g).group().is_subgroup(h)));
    if !shapes_ok {
        v("names do not denote second-stage objects at every generic".into());
        return report;
    }
    let conds: BTreeSet<&Vec<Cond>> = w.conditions.iter().collect();
    let auts: BTreeSet<&Vec<usize>> = w.automorphisms.iter().collect();
    let subs: BTreeSet<&Vec<Subgroup>> = w.subgroups.iter().collect();

    for pi in 0..s0.group().order() {
        if w.conditions.iter().any(|f| !conds.contains(&shift(s0, pi, f))) {
            v(format!("clause 1: condition names not closed under element {pi}"));
        }
        if w.automorphisms.iter().any(|f| !auts.contains(&shift(s0, pi, f))) {
            v(format!("clause 1: automorphism names not closed under element {pi}"));
        }
        if w.subgroups.iter().any(|f| !subs.contains(&shift(s0, pi, f))) {
            v(format!("clause 1: subgroup names not closed under element {pi}"));
        }
    }

    for g in 0..n {
        let s1 = stage.at(g);
        let have: BTreeSet<Cond> = w.conditions.iter().map(|f| f[g]).collect();
        if have.len() != s1.poset().len() {
            v(format!("clause 2: condition names miss conditions at generic {g}"));
        }
        let have: BTreeSet<usize> = w.automorphisms.iter().map(|f| f[g]).collect();
        if have.len() != s1.group().order() {
            v(format!("clause 2: automorphism names miss elements at generic {g}"));
        }
        let have: BTreeSet<&Subgroup> = w.subgroups.iter().map(|f| &f[g]).collect();
        let want = s1.group().subgroups_containing(s1.filter().core());
        if have.len() != want.len() || want.iter().any(|h| !have.contains(h)) {
            v(format!("clause 2: subgroup names differ from the filter at generic {g}"));
        }
    }

    if conds.len() != w.conditions.len() {
        v("clause 3: two condition names are forced equal".into());
    }
    for f in &w.conditions {
        for phi in &w.automorphisms {
            let image: Vec<Cond> = (0..n).map(|g| stage.at(g).group().element(phi[g]).apply(f[g])).collect();
            if !conds.contains(&image) {
                v("clause 3: the image of a condition name is not listed".into());
                break;
            }
        }
    }

    let group = |g: usize| stage.at(g).group();
    if !auts.contains(&(0..n).map(|g| group(g).identity()).collect::<Vec<_>>()) {
        v("clause 4: no name for the identity".into());
    }
    'compose: for a in &w.automorphisms {
        if !auts.contains(&(0..n).map(|g| group(g).inv(a[g])).collect::<Vec<_>>()) {
            v("clause 4: an inverse is not named".into());
            break;
        }
        for b in &w.automorphisms {
            if !auts.contains(&(0..n).map(|g| group(g).mul(a[g], b[g])).collect::<Vec<_>>()) {
                v("clause 4: a composition is not named".into());
                break 'compose;
            }
        }
    }
    'conj: for a in &w.automorphisms {
        for h in &w.subgroups {
            let c: Vec<Subgroup> = (0..n).map(|g| group(g).conjugate(a[g], &h[g])).collect();
            if !subs.contains(&c) {
                v("clause 4: a conjugate subgroup is not named".into());
                break 'conj;
            }
        }
    }
    'meet: for h in &w.subgroups {
        for k in &w.subgroups {
            let c: Vec<Subgroup> = (0..n).map(|g| h[g].intersect(&k[g])).collect();
            if !subs.contains(&c) {
                v("clause 4: an intersection is not named".into());
                break 'meet;
            }
        }
    }
    report.violations.dedup();
    report
}

/// `S0 ⋆ Ṡ1`: the two-step construction using only the witness's names.
pub fn reduced_iteration(s0: &SymSystem, stage: &SystemName, w: &NameWitness) -> Result<TwoStep> {
    let report = validate_name_witness(s0, stage, w);
    if !report.is_valid() {
        return Err(Error::Precondition(report.violations.join("; ")));
    }
    TwoStep::build(
        Arc::new(s0.clone()),
        stage.clone(),
        w.conditions.clone(),
        w.automorphisms.clone(),
        w.subgroups.clone(),
        *s0.guards(),
    )
}

/// Images of the reduced iteration's conditions in the full iteration.
pub fn reduced_embedding(reduced: &TwoStep, full: &TwoStep) -> Result<Vec<Cond>> {
    (0..reduced.conds.len())
        .map(|c| {
            let (p, f) = reduced.split(c);
            full.locate(p, f).ok_or_else(|| Error::Precondition("reduced condition missing from the full iteration".into()))
        })
        .collect()
}

/// `j(ẋ) = ⋃_{H̄⋆ ≤ sym⋆(ẋ)} s(H̄, {(r, j(ẏ)) : (r, ẏ) ∈ ẋ})`, sending a symmetric name of the
/// reduced iteration to a symmetric name of the full iteration forced equal to it.
/// `H̄⋆` ranges over the generators `(H0, Ḣ1)⋆` with `H0` in the base filter.
pub fn j_map(reduced: &TwoStep, full: &TwoStep, x: &PName) -> Result<PName> {
    let emb = reduced_embedding(reduced, full)?;
    let base = &reduced.base;
    let h0s = base.group().subgroups_containing(base.filter().core());
    let mut groups = Vec::new();
    for psi in &reduced.filter_fibers {
        for h0 in &h0s {
            let invariant = h0.iter().all(|pi| (0..psi.len()).all(|g| psi[base.act_generic(pi, g)] == psi[g]));
            if invariant {
                groups.push((reduced.subgroup(h0, psi), full.subgroup(h0, psi)));
            }
        }
    }
    fn go(
        reduced: &TwoStep,
        full: &TwoStep,
        emb: &[Cond],
        groups: &[(Subgroup, Subgroup)],
        x: &PName,
        memo: &mut HashMap<u32, PName>,
    ) -> Result<PName> {
        if let Some(y) = memo.get(&x.id()) {
            return Ok(y.clone());
        }
        let mut inner = Vec::with_capacity(x.len());
        for (r, y) in x.entries() {
            inner.push((emb[*r], go(reduced, full, emb, groups, y, memo)?));
        }
        let inner = PName::new(inner);
        let stab = crate::symmetric::sym_group(reduced.system(), x);
        let mut entries = Vec::new();
        for (small, big) in groups {
            if small.is_subset(&stab) {
                entries.extend(symmetrize(full.system(), big, &inner).entries().iter().cloned());
            }
        }
        if entries.is_empty() && !x.is_empty() {
            return Err(Error::NotSymmetric("no filter generator of the reduced iteration fixes the name".into()));
        }
        let out = PName::new(entries);
        memo.insert(x.id(), out.clone());
        Ok(out)
    }
    go(reduced, full, &emb, &groups, x, &mut HashMap::new())
}

/// An ideal of subsets of `{0, …, len-1}`, as bitmasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ideal {
    len: usize,
    members: BTreeSet<u64>,
}

impl Ideal {
    pub fn all_subsets(len: usize) -> Result<Ideal> {
        if len > 16 {
            return Err(Error::GuardExceeded { what: "iteration length", size: len as u128, limit: 16 });
        }
        Ok(Ideal { len, members: (0..1u64 << len).collect() })
    }

    /// Checks that `members` is closed downward and under unions and holds every
    /// singleton. On a finite index set only the full power set qualifies.
    pub fn new(len: usize, members: impl IntoIterator<Item = u64>) -> Result<Ideal> {
        let full = Ideal::all_subsets(len)?;
        let members: BTreeSet<u64> = members.into_iter().collect();
        if members.iter().any(|&m| m >> len != 0) {
            return Err(Error::Precondition("ideal member outside the index set".into()));
        }
        if (0..len).any(|i| !members.contains(&(1 << i))) {
            return Err(Error::Precondition("ideal must contain every singleton".into()));
        }
        for &a in &members {
            if members.iter().any(|&b| !members.contains(&(a | b))) {
                return Err(Error::Precondition("ideal not closed under unions".into()));
            }
            let mut sub = a;
            loop {
                if !members.contains(&sub) {
                    return Err(Error::Precondition("ideal not closed downward".into()));
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & a;
            }
        }
        debug_assert_eq!(members, full.members);
        Ok(Ideal { len, members })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, set: u64) -> bool {
        self.members.contains(&set)
    }
}

/// Produces the next stage name from the iteration so far.
pub type StageFn<'a> = dyn Fn(&SymSystem) -> Result<SystemName> + 'a;

/// The stage constructor `Š` for a fixed ground-model system.
pub fn check_stage<'a>(s: SymSystem) -> Box<StageFn<'a>> {
    Box::new(move |current: &SymSystem| Ok(SystemName::check(current, &s)))
}

/// `⟨S_α, Ṫ_α : α < δ⟩` with `S_0` the one-point system and `S_{α+1} = S_α * Ṫ_α`.
///
/// Conditions and automorphisms of `S_α` are read as sequences of stage names by
/// flattening the nested pairs.
#[derive(Debug)]
pub struct Iteration {
    start: SymSystem,
    steps: Vec<TwoStep>,
    ideal: Ideal,
}

/// Builds the iteration stage by stage. Every support lies in `ideal`, which at finite
/// length is the full power set.
pub fn finite_iteration(stages: &[Box<StageFn<'_>>], ideal: &Ideal, guards: Guards) -> Result<Iteration> {
    if ideal.len() != stages.len() {
        return Err(Error::Precondition("ideal lives on a different index set".into()));
    }
    let start = point_system().with_guards(guards);
    let mut steps: Vec<TwoStep> = Vec::with_capacity(stages.len());
    for ctor in stages {
        let current = steps.last().map(|t| t.system()).unwrap_or(&start);
        let name = ctor(current)?;
        steps.push(two_step(current, &name)?);
    }
    let it = Iteration { start, steps, ideal: ideal.clone() };
    for alpha in 0..=it.len() {
        let s = it.system(alpha);
        for c in s.poset().conds() {
            debug_assert!(it.ideal.contains(it.condition_support(alpha, c)));
        }
    }
    Ok(it)
}

impl Iteration {
    /// The length `δ`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn system(&self, alpha: usize) -> &SymSystem {
        if alpha == 0 {
            &self.start
        } else {
            self.steps[alpha - 1].system()
        }
    }

    /// The two-step iteration `S_{α+1} = S_α * Ṫ_α`.
    pub fn step(&self, alpha: usize) -> &TwoStep {
        &self.steps[alpha]
    }

    pub fn ideal(&self) -> &Ideal {
        &self.ideal
    }

    /// `⟨ṗ(β) : β < α⟩`, each `ṗ(β)` a closed `S_β`-name given by its profile.
    pub fn condition_sequence(&self, alpha: usize, c: Cond) -> Vec<Vec<Cond>> {
        let mut out = Vec::with_capacity(alpha);
        let mut c = c;
        for beta in (0..alpha).rev() {
            let (p, f) = self.steps[beta].split(c);
            out.push(f.to_vec());
            c = p;
        }
        out.reverse();
        out
    }

    /// `⟨π̇(β) : β < α⟩`, each `π̇(β)` given by its fiber.
    pub fn automorphism_sequence(&self, alpha: usize, e: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(alpha);
        let mut e = e;
        for beta in (0..alpha).rev() {
            let pair = self.steps[beta].pair_of(e);
            out.push(pair.fiber.clone());
            e = pair.base;
        }
        out.reverse();
        out
    }

    /// The condition of `S_α` with the given sequence.
    pub fn condition_of(&self, seq: &[Vec<Cond>]) -> Option<Cond> {
        let mut c = self.start.top();
        for (beta, f) in seq.iter().enumerate() {
            c = self.steps.get(beta)?.locate(c, f)?;
        }
        Some(c)
    }

    /// The group element of `S_α` with the given sequence.
    pub fn automorphism_of(&self, seq: &[Vec<usize>]) -> Option<usize> {
        let mut e = self.start.group().identity();
        for (beta, f) in seq.iter().enumerate() {
            e = self.steps.get(beta)?.element_of(&Pair { base: e, fiber: f.clone() })?;
        }
        Some(e)
    }

    /// `supp(p̄)`: the stages where `ṗ(β)` is not forced to be the trivial condition.
    pub fn condition_support(&self, alpha: usize, c: Cond) -> u64 {
        let seq = self.condition_sequence(alpha, c);
        let mut out = 0;
        for (beta, f) in seq.iter().enumerate() {
            let stage = self.steps[beta].stage();
            if f.iter().enumerate().any(|(g, &q)| q != stage.at(g).top()) {
                out |= 1 << beta;
            }
        }
        out
    }

    /// `supp(π̄)`: the stages where `π̇(β)` is not forced to be the identity.
    pub fn automorphism_support(&self, alpha: usize, e: usize) -> u64 {
        let seq = self.automorphism_sequence(alpha, e);
        let mut out = 0;
        for (beta, f) in seq.iter().enumerate() {
            let stage = self.steps[beta].stage();
            if f.iter().enumerate().any(|(g, &x)| x != stage.at(g).group().identity()) {
                out |= 1 << beta;
            }
        }
        out
    }

    /// `supp` of the least filter member: stages whose core is not the whole group.
    pub fn core_support(&self, alpha: usize) -> u64 {
        let mut out = 0;
        for beta in 0..alpha {
            let stage = self.steps[beta].stage();
            if stage.family().iter().any(|s| s.filter().core().len() != s.group().order()) {
                out |= 1 << beta;
            }
        }
        out
    }

    /// `p̄ ⌢ ⟨1̇_β : α ≤ β < γ⟩`.
    pub fn pad_condition(&self, alpha: usize, gamma: usize, c: Cond) -> Cond {
        let mut seq = self.condition_sequence(alpha, c);
        for beta in alpha..gamma {
            let stage = self.steps[beta].stage();
            seq.push((0..stage.len()).map(|g| stage.at(g).top()).collect());
        }
        self.condition_of(&seq).expect("padding stays inside the iteration")
    }

    /// `π̄ ⌢ ⟨id̆_β : α ≤ β < γ⟩`.
    pub fn pad_automorphism(&self, alpha: usize, gamma: usize, e: usize) -> usize {
        let mut seq = self.automorphism_sequence(alpha, e);
        for beta in alpha..gamma {
            let stage = self.steps[beta].stage();
            seq.push((0..stage.len()).map(|g| stage.at(g).group().identity()).collect());
        }
        self.automorphism_of(&seq).expect("padding stays inside the iteration")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{p3, point_system, ssym, striv};
    use crate::forcing::enumerate_generics;
    use crate::name::check_name;
    use crate::symmetric::is_hs;

    fn c2() -> SymSystem {
        let poset = Poset::new(&["1", "c"], &[("c", "1")], "1").unwrap();
        SymSystem::from_generators(poset, &[], &[vec![]], Guards::default()).unwrap()
    }

    /// Rank ≤ 1 names with at most two entries, plus single-entry rank-2 names.
    fn inventory(n: usize) -> Vec<PName> {
        let e = PName::empty();
        let mut out = vec![e.clone()];
        for a in 0..n {
            out.push(PName::new([(a, e.clone())]));
            for b in a + 1..n {
                out.push(PName::new([(a, e.clone()), (b, e.clone())]));
            }
        }
        let ones: Vec<PName> = (0..n).map(|a| PName::new([(a, e.clone())])).collect();
        for c in 0..n {
            for y in ones.iter().step_by(5) {
                out.push(PName::new([(c, y.clone())]));
            }
        }
        out
    }

    #[test]
    fn sizes() {
        let t = two_step(&striv(), &SystemName::check(&striv(), &striv())).unwrap();
        assert_eq!(t.system().poset().len(), 27);
        assert_eq!(t.system().group().order(), 1);
        assert_eq!(t.system().generics().len(), 4);
        // The base core swaps the two generics, so only constant choices are symmetric
        // and the iteration has the size of the product.
        let t = two_step(&ssym(), &SystemName::check(&ssym(), &ssym())).unwrap();
        let prod = product(&ssym(), &ssym()).unwrap();
        assert_eq!(t.system().poset().len(), prod.poset().len());
        assert_eq!(t.system().poset().len(), 9);
        assert_eq!(t.pairs().len(), 4);
        assert_eq!(t.system().group().order(), prod.group().order());
        assert_eq!(t.system().filter().core().len(), 4);
        let t = two_step(&striv(), &SystemName::check(&striv(), &ssym())).unwrap();
        assert_eq!(t.system().group().order(), 4);
    }

    #[test]
    fn point_second_stage_is_the_base() {
        for s in [striv(), ssym()] {
            let t = two_step(&s, &SystemName::check(&s, &point_system())).unwrap();
            let expect = s.clone();
            assert_eq!(t.system().poset().len(), expect.poset().len());
            // Labels are "(p,1)".
            let relabel: Vec<Cond> = (0..3).map(|p| t.system().poset().cond(&format!("({},1)", p3().label(p))).unwrap()).collect();
            for p in 0..3 {
                for q in 0..3 {
                    assert_eq!(t.system().poset().leq(relabel[p], relabel[q]), expect.poset().leq(p, q));
                }
            }
            assert_eq!(t.system().group().order(), expect.group().order());
            assert_eq!(t.system().filter().core().len(), expect.filter().core().len());
        }
    }

    #[test]
    fn non_check_name() {
        let s = striv();
        let name = SystemName::from_family(&s, vec![ssym(), point_system()]).unwrap();
        let t = two_step(&s, &name).unwrap();
        assert_eq!(t.system().poset().len(), 9);
        assert_eq!(t.system().group().order(), 2);
        // Over Ssym the two generics are swapped, so the family must be constant.
        assert!(SystemName::from_family(&ssym(), vec![ssym(), point_system()]).is_err());
    }

    #[test]
    fn pair_formulas_match_the_action() {
        for (a, b) in [(ssym(), ssym()), (striv(), ssym()), (ssym(), striv())] {
            let t = two_step(&a, &SystemName::check(&a, &b)).unwrap();
            let g = t.system().group();
            let n = t.system().poset().len();
            for x in t.pairs() {
                let ex = t.element_of(x).unwrap();
                let inv = t.invert_pair(x);
                let id = t.compose_pair(x, &inv);
                assert!((0..n).all(|c| t.act(&id, c) == Some(c)));
                assert_eq!(t.element_of(&inv), Some(g.inv(ex)));
                for y in t.pairs() {
                    let ey = t.element_of(y).unwrap();
                    assert_eq!(t.element_of(&t.compose_pair(x, y)), Some(g.mul(ex, ey)));
                    let conj = t.conjugate_pair(x, y);
                    assert_eq!(conj, t.compose_pair(&t.compose_pair(x, y), &t.invert_pair(x)));
                    assert_eq!(t.element_of(&conj), Some(g.conj(ex, ey)));
                }
            }
            assert!(t.system().filter().is_normal());
        }
    }

    #[test]
    fn products() {
        let p = product(&striv(), &striv()).unwrap();
        assert_eq!(p.poset().len(), 9);
        assert_eq!(p.generics().len(), 4);
        let gens = enumerate_generics(p.poset());
        let (a, b) = (striv(), striv());
        for g in &gens {
            let (x, y) = (g.atom / 3, g.atom % 3);
            let expect = a.poset().above(x).count_ones() * b.poset().above(y).count_ones();
            assert_eq!(g.conds.count_ones(), expect);
        }
        let q = product(&ssym(), &point_system()).unwrap();
        assert_eq!(q.poset().len(), 3);
        assert_eq!(q.group().order(), 2);
        let r = product(&ssym(), &ssym()).unwrap();
        assert_eq!(r.group().order(), 4);
        assert_eq!(r.filter().core().len(), 4);
    }

    #[test]
    fn factorization_round_trip() {
        for (a, b) in [(striv(), striv()), (ssym(), ssym())] {
            let t = two_step(&a, &SystemName::check(&a, &b)).unwrap();
            for g in enumerate_generics(t.system().poset()) {
                let f = factor_generic(&t, &g).unwrap();
                assert!(a.atoms().contains(&f.g0.atom));
                assert!(b.atoms().contains(&f.g1.atom));
                assert_eq!(compose_generic(&t, &f.g0, &f.g1).unwrap().conds, g.conds);
            }
        }
    }

    #[test]
    fn bracket_evaluates_like_the_name() {
        let (a, b) = (ssym(), ssym());
        let t = two_step(&a, &SystemName::check(&a, &b)).unwrap();
        let top = t.system().top();
        let mut names = inventory(t.system().poset().len());
        names.push(check_name(top, &HSet::ordinal(2)));
        for x in &names {
            let bx = bracket(&t, x).unwrap();
            let back = unbracket(&t, &bx).unwrap();
            assert_eq!(t.system().profile(&back), t.system().profile(x));
            for g in enumerate_generics(t.system().poset()) {
                let f = factor_generic(&t, &g).unwrap();
                let opened = open_bracket(&t, &bx, f.base_generic).unwrap();
                assert_eq!(opened.eval(f.g1.conds), x.eval(g.conds));
            }
        }
        assert!(unbracket(&t, &PName::new([(0, PName::new([(1, PName::empty())]))])).is_err());
    }

    #[test]
    fn name_witnesses() {
        let (a, b) = (ssym(), ssym());
        let stage = SystemName::check(&a, &b);
        let w = NameWitness::check_names(&a, &b);
        assert!(validate_name_witness(&a, &stage, &w).is_valid());
        let red = reduced_iteration(&a, &stage, &w).unwrap();
        assert!(red.system().same_up_to_labels(&product(&a, &b).unwrap()));

        let all = NameWitness::all_names(&a, &stage).unwrap();
        let full = two_step(&a, &stage).unwrap();
        let red_all = reduced_iteration(&a, &stage, &all).unwrap();
        assert!(red_all.system().same_up_to_labels(full.system()));

        let mut broken = w.clone();
        broken.automorphisms.retain(|f| f[0] != 0);
        let report = validate_name_witness(&a, &stage, &broken);
        assert!(report.violations.iter().any(|v| v.contains("clause 4")));
        assert!(reduced_iteration(&a, &stage, &broken).is_err());
    }

    #[test]
    fn symmetrization_and_j() {
        let (a, b) = (ssym(), ssym());
        let stage = SystemName::check(&a, &b);
        let red = reduced_iteration(&a, &stage, &NameWitness::check_names(&a, &b)).unwrap();
        let full = two_step(&a, &stage).unwrap();
        let emb = reduced_embedding(&red, &full).unwrap();
        for x in inventory(red.system().poset().len()) {
            let lifted = x.map_conditions(&|c| emb[c]);
            for psi in red.filter_fibers() {
                let h = full.subgroup(a.filter().core(), psi);
                let s = symmetrize(full.system(), &h, &lifted);
                assert!(h.is_subset(&crate::symmetric::sym_group(full.system(), &s)));
                let small = red.subgroup(a.filter().core(), psi);
                if small.is_subset(&crate::symmetric::sym_group(red.system(), &x)) {
                    assert_eq!(full.system().profile(&s), full.system().profile(&lifted));
                }
            }
            if is_hs(red.system(), &x) {
                let j = j_map(&red, &full, &x).unwrap();
                assert!(is_hs(full.system(), &j));
                assert_eq!(full.system().profile(&j), full.system().profile(&lifted));
            }
        }
    }

    #[test]
    fn ideals() {
        assert!(Ideal::new(2, [0, 1, 2, 3]).is_ok());
        assert!(Ideal::new(2, [0, 1, 2]).is_err());
        assert!(Ideal::new(2, [0, 1, 3]).is_err());
    }

    #[test]
    fn length_two_matches_two_step() {
        let stages = [check_stage(striv()), check_stage(striv())];
        let it = finite_iteration(&stages, &Ideal::all_subsets(2).unwrap(), Guards::default()).unwrap();
        let t = two_step(&striv(), &SystemName::check(&striv(), &striv())).unwrap();
        let s2 = it.system(2);
        assert_eq!(s2.poset().len(), t.system().poset().len());
        let map: Vec<Cond> = (0..t.system().poset().len())
            .map(|c| {
                let (p, f) = t.split(c);
                it.condition_of(&[vec![p], f.to_vec()]).unwrap()
            })
            .collect();
        let n = map.len();
        for x in 0..n {
            for y in 0..n {
                assert_eq!(t.system().poset().leq(x, y), s2.poset().leq(map[x], map[y]));
            }
        }
        assert_eq!(s2.group().order(), t.system().group().order());
    }

    #[test]
    fn supports_at_length_three() {
        let stages = [check_stage(ssym()), check_stage(c2()), check_stage(ssym())];
        let guards = Guards { poset: 128, ..Guards::default() };
        let it = finite_iteration(&stages, &Ideal::all_subsets(3).unwrap(), guards).unwrap();
        let s3 = it.system(3);
        assert_eq!(s3.poset().len(), 18);
        let g = s3.group();
        assert_eq!(g.order(), 4);
        for x in 0..g.order() {
            let sx = it.automorphism_support(3, x);
            assert_eq!(it.automorphism_support(3, g.inv(x)), sx);
            for y in 0..g.order() {
                let sxy = it.automorphism_support(3, g.mul(x, y));
                assert_eq!(sxy & !(sx | it.automorphism_support(3, y)), 0);
            }
        }
        for c in s3.poset().conds() {
            let seq = it.condition_sequence(3, c);
            assert_eq!(it.condition_of(&seq), Some(c));
        }
        assert_eq!(it.core_support(3), 0);
        // Padding keeps the order and the action.
        for alpha in 0..3 {
            let s = it.system(alpha);
            for p in s.poset().conds() {
                for q in s.poset().conds() {
                    assert_eq!(s.poset().leq(p, q), s3.poset().leq(it.pad_condition(alpha, 3, p), it.pad_condition(alpha, 3, q)));
                }
                for e in 0..s.group().order() {
                    let moved = s.group().element(e).apply(p);
                    let big = s3.group().element(it.pad_automorphism(alpha, 3, e));
                    assert_eq!(big.apply(it.pad_condition(alpha, 3, p)), it.pad_condition(alpha, 3, moved));
                }
            }
        }
    }
}
