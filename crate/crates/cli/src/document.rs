//! Workbench files: JSON objects, arrays, strings and integers, with `#` line comments.
//!
//! ```text
//! # The swap system over P3.
//! {
//!   "posets": { "P3": { "elements": ["1", "a", "b"], "order": [["a", "1"], ["b", "1"]], "top": "1" } },
//!   "automorphisms": { "tau": { "poset": "P3", "map": [["a", "b"], ["b", "a"]] } },
//!   "groups": { "G2": { "poset": "P3", "generators": ["tau"] } },
//!   "filters": { "whole": { "group": "G2", "generators": [["tau"]] } },
//!   "systems": { "Ssym": { "group": "G2", "filter": "whole" } },
//!   "names": { "u": [["a", []], ["b", []]], "one": { "check": "{{}}" } },
//!   "formulas": { "eq": "x0 = x1" },
//!   "tasks": [["validate", "Ssym"], ["force", "Ssym", "1", "eq", "u", "one"]]
//! }
//! ```

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use parking_lot::Mutex;
use serde_json::Value;
use symext::completion::completion;
use symext::equivalence::lottery_system;
use symext::iteration::{product, two_step, SystemName};
use symext::name::{bullet_name, check_name};
use symext::order::lottery_sum;
use symext::perm::{all_automorphisms, automorphism_from_labels};
use symext::system::{validate_parts, ValidationReport};
use symext::{parse_formula, Error, Formula, Guards, HSet, PName, Perm, Poset, Result, SymSystem};

/// A name before its condition labels are resolved against a poset.
#[derive(Debug, Clone, PartialEq)]
pub enum NameExpr {
    Ref(String),
    Pairs(Vec<(String, NameExpr)>),
    Check(String),
    Bullet(Vec<NameExpr>),
}

/// One task: a verb, its arguments, and per-task overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub verb: String,
    pub args: Vec<String>,
    pub rank: Option<usize>,
    pub class: Option<String>,
}

#[derive(Debug, Clone)]
enum SystemSpec {
    Parts { poset: String, group: String, filter: String },
    Product(String, String),
    Iteration(String, String),
    Lottery(String),
    Completion(String, usize),
}

#[derive(Debug, Clone)]
struct GroupSpec {
    poset: String,
    generators: Vec<String>,
    all: bool,
}

#[derive(Debug, Clone)]
struct FilterSpec {
    group: String,
    generators: Vec<Vec<String>>,
}

/// A parsed workbench file. Blocks are resolved on demand; every lookup is by id.
pub struct Document {
    posets: BTreeMap<String, Value>,
    automorphisms: BTreeMap<String, (String, Vec<(String, String)>)>,
    groups: BTreeMap<String, GroupSpec>,
    filters: BTreeMap<String, FilterSpec>,
    systems: BTreeMap<String, SystemSpec>,
    names: BTreeMap<String, NameExpr>,
    formulas: BTreeMap<String, String>,
    pub tasks: Vec<Task>,
    pub rank: usize,
    pub guards: Guards,
    built: Mutex<HashMap<String, Arc<SymSystem>>>,
}

fn parse_error(message: impl Into<String>) -> Error {
    Error::Parse { offset: 0, message: message.into() }
}

/// Drops `#` comments outside string literals.
pub fn strip_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let (mut in_string, mut escaped) = (false, false);
        let mut cut = line.len();
        for (i, ch) in line.char_indices() {
            match ch {
                _ if escaped => escaped = false,
                '\\' if in_string => escaped = true,
                '"' => in_string = !in_string,
                '#' if !in_string => {
                    cut = i;
                    break;
                }
                _ => {}
            }
        }
        out.push_str(&line[..cut]);
        out.push('\n');
    }
    out
}

fn as_str(v: &Value, what: &str) -> Result<String> {
    v.as_str().map(str::to_string).ok_or_else(|| parse_error(format!("{what} must be a string")))
}

fn str_list(v: &Value, what: &str) -> Result<Vec<String>> {
    v.as_array()
        .ok_or_else(|| parse_error(format!("{what} must be a list")))?
        .iter()
        .map(|x| as_str(x, what))
        .collect()
}

fn pair_list(v: &Value, what: &str) -> Result<Vec<(String, String)>> {
    v.as_array()
        .ok_or_else(|| parse_error(format!("{what} must be a list of pairs")))?
        .iter()
        .map(|p| match str_list(p, what)?.as_slice() {
            [a, b] => Ok((a.clone(), b.clone())),
            _ => Err(parse_error(format!("{what} entries must be pairs"))),
        })
        .collect()
}

fn block<'a>(root: &'a Value, key: &str) -> Result<Vec<(&'a String, &'a Value)>> {
    match root.get(key) {
        None => Ok(Vec::new()),
        Some(Value::Object(m)) => Ok(m.iter().collect()),
        Some(_) => Err(parse_error(format!("`{key}` must be an object"))),
    }
}

fn field<'a>(v: &'a Value, key: &str, owner: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| parse_error(format!("`{owner}` needs `{key}`")))
}

pub fn parse_name(v: &Value) -> Result<NameExpr> {
    match v {
        Value::String(s) => Ok(NameExpr::Ref(s.clone())),
        Value::Array(entries) => entries
            .iter()
            .map(|e| match e.as_array().map(Vec::as_slice) {
                Some([c, x]) => Ok((as_str(c, "condition label")?, parse_name(x)?)),
                _ => Err(parse_error("name entries are [condition, name] pairs")),
            })
            .collect::<Result<_>>()
            .map(NameExpr::Pairs),
        Value::Object(m) => {
            if let Some(c) = m.get("check") {
                Ok(NameExpr::Check(as_str(c, "check literal")?))
            } else if let Some(b) = m.get("bullet") {
                let xs = b.as_array().ok_or_else(|| parse_error("`bullet` takes a list"))?;
                Ok(NameExpr::Bullet(xs.iter().map(parse_name).collect::<Result<_>>()?))
            } else {
                Err(parse_error("a name object needs `check` or `bullet`"))
            }
        }
        _ => Err(parse_error("unrecognised name literal")),
    }
}

/// A name given on the command line: an id, `check(<set>)`, or a JSON name literal.
pub fn parse_name_arg(text: &str) -> Result<NameExpr> {
    if let Some(inner) = text.strip_prefix("check(").and_then(|r| r.strip_suffix(')')) {
        return Ok(NameExpr::Check(inner.to_string()));
    }
    if text.starts_with('[') || text.starts_with('{') {
        let v: Value = serde_json::from_str(text).map_err(|e| parse_error(e.to_string()))?;
        return parse_name(&v);
    }
    Ok(NameExpr::Ref(text.to_string()))
}

fn parse_task(v: &Value) -> Result<Task> {
    match v {
        Value::Array(_) => {
            let mut words = str_list(v, "task")?;
            if words.is_empty() {
                return Err(parse_error("empty task"));
            }
            let verb = words.remove(0);
            Ok(Task { verb, args: words, rank: None, class: None })
        }
        Value::Object(_) => Ok(Task {
            verb: as_str(field(v, "verb", "task")?, "verb")?,
            args: v.get("args").map(|a| str_list(a, "args")).transpose()?.unwrap_or_default(),
            rank: v.get("rank").map(|r| r.as_u64().map(|r| r as usize).ok_or_else(|| parse_error("rank must be an integer"))).transpose()?,
            class: v.get("class").map(|c| as_str(c, "class")).transpose()?,
        }),
        _ => Err(parse_error("a task is a list of words or an object")),
    }
}

fn parse_guards(v: &Value, mut g: Guards) -> Result<Guards> {
    let obj = v.as_object().ok_or_else(|| parse_error("`guards` must be an object"))?;
    for (k, x) in obj {
        let n = x.as_u64().ok_or_else(|| parse_error(format!("guard `{k}` must be an integer")))?;
        set_guard(&mut g, k, n)?;
    }
    Ok(g)
}

/// Sets one guard by key: `poset`, `group`, `names` or `rank`.
pub fn set_guard(g: &mut Guards, key: &str, n: u64) -> Result<()> {
    match key {
        "poset" => g.poset = n as usize,
        "group" => g.group = n as usize,
        "names" => g.names = n as u128,
        "rank" => g.rank = n as usize,
        _ => return Err(parse_error(format!("unknown guard `{key}`"))),
    }
    Ok(())
}

impl Document {
    pub fn parse(text: &str) -> Result<Document> {
        let root: Value = serde_json::from_str(&strip_comments(text)).map_err(|e| Error::Parse {
            offset: e.line(),
            message: format!("line {}, column {}: {e}", e.line(), e.column()),
        })?;
        if !root.is_object() {
            return Err(parse_error("a workbench file is an object"));
        }
        let mut doc = Document {
            posets: block(&root, "posets")?.into_iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            automorphisms: BTreeMap::new(),
            groups: BTreeMap::new(),
            filters: BTreeMap::new(),
            systems: BTreeMap::new(),
            names: BTreeMap::new(),
            formulas: BTreeMap::new(),
            tasks: Vec::new(),
            rank: 2,
            guards: Guards::default(),
            built: Mutex::new(HashMap::new()),
        };
        for (id, v) in block(&root, "automorphisms")? {
            let poset = as_str(field(v, "poset", id)?, "poset")?;
            doc.automorphisms.insert(id.clone(), (poset, pair_list(field(v, "map", id)?, "map")?));
        }
        for (id, v) in block(&root, "groups")? {
            let spec = GroupSpec {
                poset: as_str(field(v, "poset", id)?, "poset")?,
                generators: v.get("generators").map(|g| str_list(g, "generators")).transpose()?.unwrap_or_default(),
                all: v.get("all").and_then(Value::as_bool).unwrap_or(false),
            };
            doc.groups.insert(id.clone(), spec);
        }
        for (id, v) in block(&root, "filters")? {
            let gens = field(v, "generators", id)?
                .as_array()
                .ok_or_else(|| parse_error("filter generators are lists of automorphism ids"))?
                .iter()
                .map(|h| str_list(h, "subgroup generators"))
                .collect::<Result<_>>()?;
            doc.filters.insert(id.clone(), FilterSpec { group: as_str(field(v, "group", id)?, "group")?, generators: gens });
        }
        for (id, v) in block(&root, "systems")? {
            let pair = |key: &str| -> Result<Option<(String, String)>> {
                match v.get(key) {
                    None => Ok(None),
                    Some(x) => match str_list(x, key)?.as_slice() {
                        [a, b] => Ok(Some((a.clone(), b.clone()))),
                        _ => Err(parse_error(format!("`{key}` takes two system ids"))),
                    },
                }
            };
            let spec = if let Some((a, b)) = pair("product")? {
                SystemSpec::Product(a, b)
            } else if let Some((a, b)) = pair("iteration")? {
                SystemSpec::Iteration(a, b)
            } else if let Some(p) = v.get("lottery") {
                SystemSpec::Lottery(as_str(p, "lottery")?)
            } else if let Some(s) = v.get("completion") {
                let k = v.get("rank").and_then(Value::as_u64).unwrap_or(2) as usize;
                SystemSpec::Completion(as_str(s, "completion")?, k)
            } else {
                let group = as_str(field(v, "group", id)?, "group")?;
                let poset = match v.get("poset") {
                    Some(p) => as_str(p, "poset")?,
                    None => doc.groups.get(&group).map(|g| g.poset.clone()).ok_or_else(|| Error::Unresolved(group.clone()))?,
                };
                SystemSpec::Parts { poset, group, filter: as_str(field(v, "filter", id)?, "filter")? }
            };
            doc.systems.insert(id.clone(), spec);
        }
        for (id, v) in block(&root, "names")? {
            doc.names.insert(id.clone(), parse_name(v)?);
        }
        for (id, v) in block(&root, "formulas")? {
            let text = as_str(v, "formula")?;
            parse_formula(&text)?;
            doc.formulas.insert(id.clone(), text);
        }
        if let Some(t) = root.get("tasks") {
            doc.tasks = t.as_array().ok_or_else(|| parse_error("`tasks` must be a list"))?.iter().map(parse_task).collect::<Result<_>>()?;
        }
        if let Some(c) = root.get("config") {
            if let Some(r) = c.get("rank") {
                doc.rank = r.as_u64().ok_or_else(|| parse_error("rank must be an integer"))? as usize;
            }
            if let Some(g) = c.get("guards") {
                doc.guards = parse_guards(g, doc.guards)?;
            }
        }
        Ok(doc)
    }

    pub fn poset(&self, id: &str) -> Result<Poset> {
        self.poset_at(id, 0)
    }

    fn poset_at(&self, id: &str, depth: usize) -> Result<Poset> {
        if depth > 32 {
            return Err(parse_error(format!("poset `{id}` refers to itself")));
        }
        let v = self.posets.get(id).ok_or_else(|| Error::Unresolved(id.to_string()))?;
        let poset = if let Some(parts) = v.get("lottery") {
            let parts = str_list(parts, "lottery")?.iter().map(|p| self.poset_at(p, depth + 1)).collect::<Result<Vec<_>>>()?;
            lottery_sum(&parts.iter().collect::<Vec<_>>())?
        } else {
            let elements = str_list(field(v, "elements", id)?, "elements")?;
            let order = v.get("order").map(|o| pair_list(o, "order")).transpose()?.unwrap_or_default();
            Poset::new(&elements, &order, &as_str(field(v, "top", id)?, "top")?)?
        };
        self.guards.check_poset(poset.len())?;
        Ok(poset)
    }

    fn automorphism(&self, id: &str, poset_id: &str, poset: &Poset) -> Result<Perm> {
        let (owner, map) = self.automorphisms.get(id).ok_or_else(|| Error::Unresolved(id.to_string()))?;
        if owner != poset_id {
            return Err(Error::Precondition(format!("automorphism `{id}` acts on `{owner}`, not `{poset_id}`")));
        }
        automorphism_from_labels(poset, map)
    }

    /// The poset, group generators and filter generators of a system given by parts.
    fn parts(&self, poset_id: &str, group: &str, filter: &str) -> Result<(Poset, Vec<Perm>, Vec<Vec<Perm>>)> {
        let poset = self.poset(poset_id)?;
        let g = self.groups.get(group).ok_or_else(|| Error::Unresolved(group.to_string()))?;
        if g.poset != poset_id {
            return Err(Error::Precondition(format!("group `{group}` acts on `{}`, not `{poset_id}`", g.poset)));
        }
        let gens = if g.all {
            all_automorphisms(&poset, &self.guards)?
        } else {
            g.generators.iter().map(|a| self.automorphism(a, poset_id, &poset)).collect::<Result<_>>()?
        };
        let f = self.filters.get(filter).ok_or_else(|| Error::Unresolved(filter.to_string()))?;
        if f.group != group {
            return Err(Error::Precondition(format!("filter `{filter}` is over `{}`, not `{group}`", f.group)));
        }
        let fgens = f
            .generators
            .iter()
            .map(|h| h.iter().map(|a| self.automorphism(a, poset_id, &poset)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok((poset, gens, fgens))
    }

    /// Validation of a system given by parts, without building it. Derived systems are
    /// valid by construction once they build.
    pub fn validate(&self, id: &str) -> Result<ValidationReport> {
        match self.systems.get(id).ok_or_else(|| Error::Unresolved(id.to_string()))? {
            SystemSpec::Parts { poset, group, filter } => {
                let (p, gens, fgens) = self.parts(poset, group, filter)?;
                Ok(validate_parts(&p, &gens, &fgens, &self.guards))
            }
            _ => Ok(self.system(id)?.validate()),
        }
    }

    pub fn system(&self, id: &str) -> Result<Arc<SymSystem>> {
        self.system_at(id, 0)
    }

    fn system_at(&self, id: &str, depth: usize) -> Result<Arc<SymSystem>> {
        if let Some(s) = self.built.lock().get(id) {
            return Ok(s.clone());
        }
        if depth > 32 {
            return Err(parse_error(format!("system `{id}` refers to itself")));
        }
        let spec = self.systems.get(id).ok_or_else(|| Error::Unresolved(id.to_string()))?;
        let sub = |x: &str| self.system_at(x, depth + 1);
        let s = match spec {
            SystemSpec::Parts { poset, group, filter } => {
                let (p, gens, fgens) = self.parts(poset, group, filter)?;
                SymSystem::from_generators(p, &gens, &fgens, self.guards)?
            }
            SystemSpec::Product(a, b) => product(&*sub(a)?, &*sub(b)?)?,
            SystemSpec::Iteration(a, b) => {
                let (a, b) = (sub(a)?, sub(b)?);
                two_step(&a, &SystemName::check(&a, &b))?.system().clone()
            }
            SystemSpec::Lottery(p) => lottery_system(&self.poset(p)?, self.guards)?,
            SystemSpec::Completion(s, k) => completion(&*sub(s)?, *k)?.system,
        };
        let s = Arc::new(s.with_guards(self.guards));
        self.built.lock().insert(id.to_string(), s.clone());
        Ok(s)
    }

    pub fn formula(&self, text: &str) -> Result<Formula> {
        match self.formulas.get(text) {
            Some(f) => parse_formula(f),
            None => parse_formula(text),
        }
    }

    /// Resolves a name against `poset`; the top condition carries `check` and `bullet`.
    pub fn name(&self, expr: &NameExpr, poset: &Poset) -> Result<PName> {
        self.name_at(expr, poset, 0)
    }

    fn name_at(&self, expr: &NameExpr, poset: &Poset, depth: usize) -> Result<PName> {
        if depth > 64 {
            return Err(parse_error("name definitions are cyclic"));
        }
        match expr {
            NameExpr::Ref(id) => {
                let e = self.names.get(id).ok_or_else(|| Error::Unresolved(id.clone()))?;
                self.name_at(e, poset, depth + 1)
            }
            NameExpr::Pairs(entries) => entries
                .iter()
                .map(|(c, x)| Ok((poset.cond(c)?, self.name_at(x, poset, depth + 1)?)))
                .collect::<Result<Vec<_>>>()
                .map(PName::new),
            NameExpr::Check(lit) => Ok(check_name(poset.top(), &HSet::parse(lit)?)),
            NameExpr::Bullet(xs) => {
                let xs = xs.iter().map(|x| self.name_at(x, poset, depth + 1)).collect::<Result<Vec<_>>>()?;
                Ok(bullet_name(poset.top(), xs))
            }
        }
    }

    pub fn name_arg(&self, text: &str, poset: &Poset) -> Result<PName> {
        self.name(&parse_name_arg(text)?, poset)
    }
}
