//! Bounded formulas over hereditary sets.
//!
//! ```text
//! formula := formula "->" formula | formula "or" formula | formula "and" formula
//!          | "not" formula | "(" formula ")" | atom
//!          | ("forall" | "exists") var "in" term "." formula
//! atom    := term ("in" | "=" | "sub") term
//! term    := "x" digits | "v" ident
//! ```
//!
//! Precedence is `not` > `and` > `or` > `->`; `->` associates to the right, `and`/`or`
//! to the left, and a quantifier body extends as far right as possible. `x0, x1, …` are
//! slots filled by the caller; `v…` are variables, bound by quantifiers or left free.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::hset::HSet;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Slot(usize),
    Var(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    In,
    Eq,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Rel, Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Term, Box<Formula>),
    Exists(String, Term, Box<Formula>),
}

impl Formula {
    pub fn atom(rel: Rel, a: usize, b: usize) -> Formula {
        Formula::Atom(rel, Term::Slot(a), Term::Slot(b))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// One more than the largest slot index used, so `x0 in x3` needs four slots.
    pub fn slot_count(&self) -> usize {
        let mut n = 0;
        self.visit_terms(&mut |t| {
            if let Term::Slot(i) = t {
                n = n.max(i + 1);
            }
        });
        n
    }

    fn visit_terms(&self, f: &mut dyn FnMut(&Term)) {
        match self {
            Formula::Atom(_, a, b) => {
                f(a);
                f(b);
            }
            Formula::Not(x) => x.visit_terms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_terms(f);
                b.visit_terms(f);
            }
            Formula::Forall(_, t, body) | Formula::Exists(_, t, body) => {
                f(t);
                body.visit_terms(f);
            }
        }
    }

    /// Variables occurring free.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            let term = |t: &Term, bound: &Vec<String>, out: &mut BTreeSet<String>| {
                if let Term::Var(v) = t {
                    if !bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
            };
            match f {
                Formula::Atom(_, a, b) => {
                    term(a, bound, out);
                    term(b, bound, out);
                }
                Formula::Not(x) => go(x, bound, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Forall(v, t, body) | Formula::Exists(v, t, body) => {
                    term(t, bound, out);
                    bound.push(v.clone());
                    go(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Forall(..) | Formula::Exists(..) => 0,
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Not(..) => 4,
            Formula::Atom(..) => 5,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Slot(i) => write!(f, "x{i}"),
            Term::Var(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::In => "in",
            Rel::Eq => "=",
            Rel::Sub => "sub",
        })
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula, min: u8) -> fmt::Result {
    if child.precedence() < min {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(rel, a, b) => write!(f, "{a} {rel} {b}"),
            Formula::Not(x) => {
                f.write_str("not ")?;
                write_child(f, x, 4)
            }
            Formula::And(a, b) => {
                write_child(f, a, 3)?;
                f.write_str(" and ")?;
                write_child(f, b, 4)
            }
            Formula::Or(a, b) => {
                write_child(f, a, 2)?;
                f.write_str(" or ")?;
                write_child(f, b, 3)
            }
            Formula::Implies(a, b) => {
                write_child(f, a, 2)?;
                f.write_str(" -> ")?;
                write_child(f, b, 1)
            }
            Formula::Forall(v, t, body) => write!(f, "forall {v} in {t} . {body}"),
            Formula::Exists(v, t, body) => write!(f, "exists {v} in {t} . {body}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    LParen,
    RParen,
    Dot,
    Equals,
    Arrow,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'.' => out.push((start, Tok::Dot)),
            b'=' => out.push((start, Tok::Equals)),
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((start, Tok::Arrow));
                i += 1;
            }
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Word(text[start..i].to_string())));
                continue;
            }
            _ => {
                return Err(Error::Parse { offset: start, message: format!("unexpected character `{}`", text[start..].chars().next().unwrap_or('?')) })
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

const KEYWORDS: [&str; 7] = ["in", "sub", "not", "and", "or", "forall", "exists"];

impl Parser {
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { offset: self.offset(), message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_word(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w == word)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn expect_word(&mut self, word: &str) -> Result<()> {
        if self.peek_word(word) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected `{word}`"))
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut acc = self.conjunction()?;
        while self.peek_word("or") {
            self.pos += 1;
            let rhs = self.conjunction()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut acc = self.unary()?;
        while self.peek_word("and") {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Word(w)) if w == "not" => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Word(w)) if w == "forall" || w == "exists" => {
                let universal = w == "forall";
                self.pos += 1;
                let var = match self.term()? {
                    Term::Var(v) => v,
                    Term::Slot(_) => return self.error("quantified variable must start with `v`"),
                };
                self.expect_word("in")?;
                let bound = self.term()?;
                self.expect(Tok::Dot, "`.`")?;
                let body = Box::new(self.formula()?);
                Ok(if universal { Formula::Forall(var, bound, body) } else { Formula::Exists(var, bound, body) })
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let a = self.term()?;
        let rel = match self.peek() {
            Some(Tok::Equals) => Rel::Eq,
            Some(Tok::Word(w)) if w == "in" => Rel::In,
            Some(Tok::Word(w)) if w == "sub" => Rel::Sub,
            _ => return self.error("expected `in`, `=` or `sub`"),
        };
        self.pos += 1;
        let b = self.term()?;
        Ok(Formula::Atom(rel, a, b))
    }

    fn term(&mut self) -> Result<Term> {
        let Some(Tok::Word(w)) = self.peek().cloned() else {
            return self.error("expected a term");
        };
        if KEYWORDS.contains(&w.as_str()) {
            return self.error(format!("keyword `{w}` where a term was expected"));
        }
        let term = if let Some(digits) = w.strip_prefix('x').filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit())) {
            match digits.parse() {
                Ok(i) => Term::Slot(i),
                Err(_) => return self.error("slot index too large"),
            }
        } else if w.starts_with('v') {
            Term::Var(w)
        } else {
            return self.error(format!("`{w}` is not a term"));
        };
        self.pos += 1;
        Ok(term)
    }
}

/// Parses a formula; errors carry the byte offset of the offending token.
pub fn parse(text: &str) -> Result<Formula> {
    let mut parser = Parser { toks: tokenize(text)?, pos: 0, end: text.len() };
    let f = parser.formula()?;
    if parser.pos != parser.toks.len() {
        return parser.error("trailing input");
    }
    Ok(f)
}

/// An assignment: values for slots and for free variables.
#[derive(Debug, Clone, Default)]
pub struct Assignment {
    pub slots: Vec<HSet>,
    pub vars: Vec<(String, HSet)>,
}

impl Assignment {
    pub fn slots(slots: Vec<HSet>) -> Assignment {
        Assignment { slots, vars: Vec::new() }
    }

    pub fn with_var(mut self, var: &str, value: HSet) -> Assignment {
        self.vars.push((var.to_string(), value));
        self
    }

    fn term(&self, t: &Term) -> Result<&HSet> {
        match t {
            Term::Slot(i) => self.slots.get(*i).ok_or_else(|| Error::Precondition(format!("unassigned slot x{i}"))),
            Term::Var(v) => self
                .vars
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, x)| x)
                .ok_or_else(|| Error::Precondition(format!("unassigned variable {v}"))),
        }
    }
}

/// Truth of `f` in the hereditarily finite sets under `env`.
pub fn eval(env: &Assignment, f: &Formula) -> Result<bool> {
    let mut env = env.clone();
    eval_in(&mut env, f)
}

fn eval_in(env: &mut Assignment, f: &Formula) -> Result<bool> {
    Ok(match f {
        Formula::Atom(rel, a, b) => {
            let (a, b) = (env.term(a)?, env.term(b)?);
            match rel {
                Rel::In => b.contains(a),
                Rel::Eq => a == b,
                Rel::Sub => a.is_subset(b),
            }
        }
        Formula::Not(x) => !eval_in(env, x)?,
        Formula::And(a, b) => eval_in(env, a)? && eval_in(env, b)?,
        Formula::Or(a, b) => eval_in(env, a)? || eval_in(env, b)?,
        Formula::Implies(a, b) => !eval_in(env, a)? || eval_in(env, b)?,
        Formula::Forall(v, t, body) | Formula::Exists(v, t, body) => {
            let universal = matches!(f, Formula::Forall(..));
            let bound = env.term(t)?.clone();
            let mut result = universal;
            for e in bound.elems() {
                env.vars.push((v.clone(), e.clone()));
                let holds = eval_in(env, body);
                env.vars.pop();
                if holds? != universal {
                    result = !universal;
                    break;
                }
            }
            result
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(text: &str) -> String {
        let f = parse(text).unwrap();
        let printed = f.to_string();
        assert_eq!(parse(&printed).unwrap(), f, "{printed}");
        printed
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse("x0 in x1").unwrap(), Formula::atom(Rel::In, 0, 1));
        let sub = parse("forall v in x0 . v in x1").unwrap();
        assert_eq!(
            sub,
            Formula::Forall(
                "v".into(),
                Term::Slot(0),
                Box::new(Formula::Atom(Rel::In, Term::Var("v".into()), Term::Slot(1)))
            )
        );
        assert_eq!(parse("not (x0 = x1)").unwrap(), Formula::not(Formula::atom(Rel::Eq, 0, 1)));
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse("not x0 in x1 and x1 in x2 or x0 = x2 -> x0 sub x1 -> x1 sub x0").unwrap();
        let expected = Formula::implies(
            Formula::or(
                Formula::and(Formula::not(Formula::atom(Rel::In, 0, 1)), Formula::atom(Rel::In, 1, 2)),
                Formula::atom(Rel::Eq, 0, 2),
            ),
            Formula::implies(Formula::atom(Rel::Sub, 0, 1), Formula::atom(Rel::Sub, 1, 0)),
        );
        assert_eq!(f, expected);
        assert_eq!(round_trip("x0 in x1 and (x1 in x2 and x2 in x3)"), "x0 in x1 and (x1 in x2 and x2 in x3)");
        assert_eq!(round_trip("(x0 = x1 -> x1 = x0) -> x0 = x0"), "(x0 = x1 -> x1 = x0) -> x0 = x0");
    }

    #[test]
    fn quantifier_body_extends_right() {
        let f = parse("exists v in x0 . v in x1 or v = x2").unwrap();
        assert!(matches!(f, Formula::Exists(_, _, ref body) if matches!(**body, Formula::Or(..))));
        assert_eq!(round_trip("(forall v in x0 . v in x1) and x0 = x0"), "(forall v in x0 . v in x1) and x0 = x0");
        round_trip("x0 = x0 and forall vz in x0 . exists vw in vz . vw sub x1");
    }

    #[test]
    fn syntax_errors_have_positions() {
        assert!(matches!(parse("x0 in"), Err(Error::Parse { offset: 5, .. })));
        assert!(matches!(parse("x0 ∈ x1"), Err(Error::Parse { offset: 3, .. })));
        assert!(matches!(parse("y in x0"), Err(Error::Parse { offset: 0, .. })));
        assert!(matches!(parse("forall x0 in x1 . x0 = x0"), Err(Error::Parse { .. })));
        assert!(parse("(x0 in x1").is_err());
    }

    #[test]
    fn eval_examples() {
        let empty = HSet::empty();
        let one = HSet::ordinal(1);
        let two = HSet::ordinal(2);
        let env = Assignment::slots(vec![empty.clone(), one.clone(), two.clone()]);
        assert!(eval(&env, &parse("x0 in x1").unwrap()).unwrap());
        assert!(eval(&env, &parse("x1 sub x2").unwrap()).unwrap());
        assert!(!eval(&env, &parse("exists v in x0 . v = v").unwrap()).unwrap());
        assert!(eval(&env, &parse("forall v in x1 . v in x2").unwrap()).unwrap());
        assert!(matches!(eval(&env, &parse("x0 in x7").unwrap()), Err(Error::Precondition(_))));
        let free = Assignment::slots(vec![one]).with_var("vy", two);
        assert!(eval(&free, &parse("x0 in vy").unwrap()).unwrap());
    }

    #[test]
    fn free_variables() {
        let f = parse("vy sub x0 and forall v in vy . v in x1").unwrap();
        assert_eq!(f.free_vars().into_iter().collect::<Vec<_>>(), vec!["vy".to_string()]);
        assert_eq!(f.slot_count(), 2);
    }
}
