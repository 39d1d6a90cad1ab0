//! The verbs. Each builds a [`Report`] whose text and JSON forms depend only on the
//! document and the arguments.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use symext::completion::{completion, tenacious_equivalent};
use symext::equivalence::{find_equivalence, uniform_correspondence, weakly_equivalent, NameClass};
use symext::forcing::sym_forces_detail;
use symext::iteration::{check_stage, finite_iteration, product, reduced_iteration, two_step, Ideal, NameWitness, SystemName};
use symext::quotient::{identity_embedding, quotient_system, RespectBasis};
use symext::suites::{run_suite, SUITES};
use symext::symmetric::{enumerate_hs, is_hr, is_hs};
use symext::{CondSet, Error, Result, SymSystem};

use crate::document::{Document, Task};

/// Text lines for people and a JSON object for machines.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub title: String,
    pub lines: Vec<String>,
    pub data: Value,
}

impl Report {
    pub fn text(&self) -> String {
        let mut out = format!("== {} ==\n", self.title);
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out.push_str("json: ");
        out.push_str(&self.data.to_string());
        out.push('\n');
        out
    }
}

pub const VERBS: [&str; 10] = ["validate", "force", "hs", "tenacious", "complete", "iterate", "product", "quotient", "equiv", "suite"];

/// Options that apply to every task unless the task overrides them.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub rank: Option<usize>,
    pub class: Option<String>,
}

/// A task naming a verb that does not exist.
#[derive(Debug)]
pub struct UnknownVerb(pub String);

pub enum Failure {
    Verb(UnknownVerb),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Lib(e)
    }
}

fn arg<'a>(task: &'a Task, i: usize, what: &str) -> Result<&'a str> {
    task.args
        .get(i)
        .map(String::as_str)
        .ok_or_else(|| Error::Precondition(format!("`{}` needs {what} as argument {}", task.verb, i + 1)))
}

fn labels(s: &SymSystem, set: CondSet) -> Vec<String> {
    s.poset().conds().filter(|&c| set & (1u128 << c) != 0).map(|c| s.poset().label(c).to_string()).collect()
}

pub fn run(doc: &Document, task: &Task, opts: &Options) -> std::result::Result<Report, Failure> {
    let rank = task.rank.or(opts.rank).unwrap_or(doc.rank);
    let title = std::iter::once(task.verb.as_str()).chain(task.args.iter().map(String::as_str)).collect::<Vec<_>>().join(" ");
    let (lines, data) = match task.verb.as_str() {
        "validate" => validate(doc, task)?,
        "force" => force(doc, task)?,
        "hs" => hs(doc, task, rank)?,
        "tenacious" => tenacious(doc, task)?,
        "complete" => complete(doc, task, rank)?,
        "iterate" => iterate(doc, task)?,
        "product" => product_verb(doc, task)?,
        "quotient" => quotient(doc, task)?,
        "equiv" => {
            let class = task.class.clone().or_else(|| opts.class.clone()).or_else(|| task.args.get(2).cloned());
            equiv(doc, task, rank, class.as_deref().unwrap_or("HS"))?
        }
        "suite" => suite(task)?,
        other => return Err(Failure::Verb(UnknownVerb(other.to_string()))),
    };
    let mut data = data;
    data["verb"] = json!(task.verb);
    data["args"] = json!(task.args);
    Ok(Report { title, lines, data })
}

type Out = (Vec<String>, Value);

fn system_summary(s: &SymSystem) -> Value {
    json!({
        "conditions": s.poset().len(),
        "group_order": s.group().order(),
        "core_order": s.filter().core().len(),
        "filter_generators": s.filter().generators().len(),
        "generics": s.generics().len(),
        "tenacious": s.is_tenacious(),
    })
}

fn summary_line(s: &SymSystem) -> String {
    format!(
        "conditions {}, group order {}, core order {}, generics {}, tenacious {}",
        s.poset().len(),
        s.group().order(),
        s.filter().core().len(),
        s.generics().len(),
        s.is_tenacious()
    )
}

fn validate(doc: &Document, task: &Task) -> Result<Out> {
    let id = arg(task, 0, "a system")?;
    let report = doc.validate(id)?;
    if !report.is_valid() {
        let mut lines = vec!["invalid".to_string()];
        lines.extend(report.violations.iter().map(|v| format!("  {v}")));
        return Ok((lines, json!({ "valid": false, "violations": report.violations })));
    }
    let s = doc.system(id)?;
    let mut data = system_summary(&s);
    data["valid"] = json!(true);
    Ok((vec!["valid".into(), summary_line(&s)], data))
}

fn force(doc: &Document, task: &Task) -> Result<Out> {
    let s = doc.system(arg(task, 0, "a system")?)?;
    let p = s.poset().cond(arg(task, 1, "a condition")?)?;
    let f = doc.formula(arg(task, 2, "a formula")?)?;
    let names = task.args[3..].iter().map(|x| doc.name_arg(x, s.poset())).collect::<Result<Vec<_>>>()?;
    let out = sym_forces_detail(&s, p, &f, &names)?;
    let witness = out.counterexample.as_ref().map(|g| s.poset().label(g.atom).to_string());
    let mut lines = vec![format!("{}", out.holds)];
    if let Some(w) = &witness {
        lines.push(format!("fails at the generic through {w}"));
    }
    Ok((lines, json!({ "holds": out.holds, "formula": f.to_string(), "counterexample": witness })))
}

fn hs(doc: &Document, task: &Task, rank: usize) -> Result<Out> {
    let s = doc.system(arg(task, 0, "a system")?)?;
    if task.args.len() > 1 {
        let mut lines = Vec::new();
        let mut rows = Vec::new();
        for text in &task.args[1..] {
            let x = doc.name_arg(text, s.poset())?;
            let (h, r) = (is_hs(&s, &x), is_hr(&s, &x));
            lines.push(format!("{text}: HS {h}, HR {r}"));
            rows.push(json!({ "name": text, "hs": h, "hr": r }));
        }
        return Ok((lines, json!({ "names": rows })));
    }
    let mut lines = Vec::new();
    let mut counts = Vec::new();
    for k in 0..=rank {
        let n = enumerate_hs(&s, k)?.len();
        lines.push(format!("rank {k}: {n} hereditarily symmetric names"));
        counts.push(n);
    }
    Ok((lines, json!({ "rank": rank, "counts": counts })))
}

fn tenacious(doc: &Document, task: &Task) -> Result<Out> {
    let s = doc.system(arg(task, 0, "a system")?)?;
    let conds = labels(&s, s.tenacious_conditions());
    let t = tenacious_equivalent(&s)?;
    let lines = vec![
        format!("tenacious {}", s.is_tenacious()),
        format!("tenacious conditions: {}", conds.join(" ")),
        format!("tenacious equivalent: {}", summary_line(&t.system)),
    ];
    Ok((lines, json!({ "tenacious": s.is_tenacious(), "conditions": conds, "equivalent": system_summary(&t.system) })))
}

fn complete(doc: &Document, task: &Task, rank: usize) -> Result<Out> {
    let s = doc.system(arg(task, 0, "a system")?)?;
    let c = completion(&s, rank)?;
    let again = completion(&c.system, rank)?;
    let idem = again.system.same_up_to_labels(&c.system);
    let lines = vec![format!("rank {rank} completion: {}", summary_line(&c.system)), format!("idempotent {idem}")];
    let mut data = system_summary(&c.system);
    data["rank"] = json!(rank);
    data["idempotent"] = json!(idem);
    Ok((lines, data))
}

fn iterate(doc: &Document, task: &Task) -> Result<Out> {
    if task.args.is_empty() {
        return Err(Error::Precondition("`iterate` needs at least one stage".into()));
    }
    let systems = task.args.iter().map(|id| doc.system(id)).collect::<Result<Vec<_>>>()?;
    let stages: Vec<_> = systems.iter().map(|s| check_stage((**s).clone())).collect();
    let it = finite_iteration(&stages, &Ideal::all_subsets(stages.len())?, doc.guards)?;
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    for alpha in 0..=it.len() {
        let s = it.system(alpha);
        let mut histogram: BTreeMap<u32, usize> = BTreeMap::new();
        for c in s.poset().conds() {
            *histogram.entry(it.condition_support(alpha, c).count_ones()).or_default() += 1;
        }
        let hist: Vec<String> = histogram.iter().map(|(k, n)| format!("{k}:{n}")).collect();
        lines.push(format!(
            "stage {alpha}: |P| {}, |G| {}, filter generators {}, supports {}",
            s.poset().len(),
            s.group().order(),
            s.filter().generators().len(),
            hist.join(" ")
        ));
        rows.push(json!({
            "stage": alpha,
            "conditions": s.poset().len(),
            "group_order": s.group().order(),
            "filter_generators": s.filter().generators().len(),
            "supports": histogram.iter().map(|(k, n)| json!([k, n])).collect::<Vec<_>>(),
        }));
    }
    Ok((lines, json!({ "stages": rows })))
}

fn product_verb(doc: &Document, task: &Task) -> Result<Out> {
    let a = doc.system(arg(task, 0, "a system")?)?;
    let b = doc.system(arg(task, 1, "a second system")?)?;
    let p = product(&a, &b)?;
    let stage = SystemName::check(&a, &b);
    let t = two_step(&a, &stage)?;
    let red = reduced_iteration(&a, &stage, &NameWitness::check_names(&a, &b))?;
    let same = red.system().same_up_to_labels(&p);
    let lines = vec![
        format!("product: {}", summary_line(&p)),
        format!("two-step with check name: {}", summary_line(t.system())),
        format!("reduced iteration is the product {same}"),
    ];
    Ok((lines, json!({ "product": system_summary(&p), "two_step": system_summary(t.system()), "reduced_is_product": same })))
}

fn quotient(doc: &Document, task: &Task) -> Result<Out> {
    let s0 = doc.system(arg(task, 0, "a system")?)?;
    let s1 = doc.system(arg(task, 1, "a supersystem")?)?;
    if s0.poset().labels() != s1.poset().labels() {
        return Err(Error::Precondition("`quotient` needs both systems over the same poset".into()));
    }
    let basis = RespectBasis::default_for(&s0, 1)?;
    let qs = quotient_system(&s0, &s1, &identity_embedding(s0.poset()), &basis)?;
    let qf = qs.forcing();
    let label = |c| s0.poset().label(c).to_string();
    let mut lines = vec![format!("basis of {} names, {} ψ entries", basis.len(), qf.entries().len())];
    let mut entries = Vec::new();
    for e in qf.entries() {
        let pairs: Vec<String> = e.pairs.iter().map(|(i, j)| format!("({i},{j})")).collect();
        lines.push(format!("  ψ: p {} r {} pairs [{}]", label(e.p), label(e.r), pairs.join(" ")));
        entries.push(json!({ "p": label(e.p), "r": label(e.r), "pairs": e.pairs }));
    }
    let mut evaluated = Vec::new();
    for g in 0..s0.generics().len() {
        let ev = qf.evaluated(g);
        let conds: Vec<String> = ev
            .conds()
            .iter()
            .map(|c| {
                let pairs: Vec<String> = c.pairs.iter().map(|(i, v)| format!("({i},{v})")).collect();
                format!("{}[{}]", label(c.r), pairs.join(" "))
            })
            .collect();
        lines.push(format!("generic through {}: {} conditions: {}", label(s0.atoms()[g]), ev.len(), conds.join(" ")));
        evaluated.push(json!({ "generic": label(s0.atoms()[g]), "conditions": conds }));
    }
    Ok((lines, json!({ "psi": entries, "evaluated": evaluated })))
}

fn equiv(doc: &Document, task: &Task, rank: usize, class: &str) -> Result<Out> {
    let s = doc.system(arg(task, 0, "a system")?)?;
    let t = doc.system(arg(task, 1, "a second system")?)?;
    let cls: NameClass = class.parse()?;
    let literal = weakly_equivalent(&s, &t, rank)?;
    let uniform = uniform_correspondence(&s, &t, rank)?;
    let mut lines = vec![
        format!("bound: rank {rank}"),
        format!("weakly equivalent {literal}"),
        format!("uniformly weakly equivalent {}", uniform.is_some()),
    ];
    let mut data = json!({
        "class": cls.to_string(),
        "rank": rank,
        "weak": literal,
        "uniform": uniform.as_ref().map(|(h, k)| json!({ "forward": h, "backward": k })),
    });
    match find_equivalence(&s, &t, cls, rank)? {
        Some(w) => {
            let iso = w.iso.clone().unwrap_or_default();
            lines.push(format!("{cls}-equivalent via {}", w.via));
            lines.push(format!("atom map: {}", iso.iter().enumerate().map(|(i, j)| format!("{i}->{j}")).collect::<Vec<_>>().join(" ")));
            data["witness"] = json!({ "via": w.via, "atoms": iso });
        }
        None => {
            lines.push(format!("{cls}: none at bounds"));
            data["witness"] = Value::Null;
        }
    }
    Ok((lines, data))
}

/// Suites by number or by slug of their title, e.g. `forcing-theorem`.
pub fn suite_number(name: &str) -> Option<usize> {
    if let Ok(n) = name.parse::<usize>() {
        return SUITES.iter().any(|s| s.0 == n).then_some(n);
    }
    SUITES.iter().find(|s| s.1.replace(' ', "-") == name).map(|s| s.0)
}

fn suite(task: &Task) -> Result<Out> {
    let name = arg(task, 0, "a suite")?;
    let n = suite_number(name).ok_or_else(|| Error::Unresolved(name.to_string()))?;
    let o = run_suite(n)?;
    let status = if o.passed() { "PASS" } else { "FAIL" };
    let mut lines = vec![format!("suite {n} ({}): {status}, {} checks, {} failed", o.title, o.checks, o.failed)];
    lines.extend(o.failures.iter().map(|f| format!("  {f}")));
    Ok((lines, json!({ "suite": n, "title": o.title, "passed": o.passed(), "checks": o.checks, "failed": o.failed, "failures": o.failures })))
}
