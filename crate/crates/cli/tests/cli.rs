//! The binary's contract: verbs, exit codes and report formats.

use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(file)
}

fn symext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symext")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn force_example() {
    let p3 = corpus("p3.wb");
    let o = symext(&[p3.to_str().unwrap(), "force", "Ssym", "1", "x0 = x1", "u", "check({{}})"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().nth(1) == Some("true"), "{}", stdout(&o));
}

#[test]
fn validate_example() {
    let o = symext(&[corpus("p3.wb").to_str().unwrap(), "validate", "Ssym"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().nth(1), Some("valid"));
    let o = symext(&[corpus("tree.wb").to_str().unwrap(), "validate", "Tbad"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().nth(1), Some("invalid"));
}

#[test]
fn exit_codes() {
    let p3 = corpus("p3.wb");
    let p3 = p3.to_str().unwrap();
    assert_eq!(symext(&[p3, "frobnicate", "Ssym"]).status.code(), Some(2));
    assert_eq!(symext(&[p3, "validate", "Nowhere"]).status.code(), Some(3));
    assert_eq!(symext(&[p3, "force", "Ssym", "1", "x0 = x0", "ghost"]).status.code(), Some(3));
    assert_eq!(symext(&[p3, "suite", "no-such-suite"]).status.code(), Some(3));
    assert_eq!(symext(&[p3, "hs", "Ssym", "--rank", "2", "--guard", "names=10"]).status.code(), Some(4));
    assert_eq!(symext(&[p3, "hs", "Ssym", "--rank", "9"]).status.code(), Some(4));
    assert_eq!(symext(&[p3, "force", "Ssym", "z", "x0 = x0"]).status.code(), Some(1));
    assert_eq!(symext(&["/nonexistent.wb"]).status.code(), Some(1));
}

#[test]
fn json_reports() {
    let o = symext(&[corpus("p3.wb").to_str().unwrap(), "--report", "json", "equiv", "Striv", "Ssym", "--class", "N"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["class"], "N");
    assert_eq!(v[0]["weak"], true);
    assert_eq!(v[0]["rank"], 2);
    assert!(v[0]["witness"]["atoms"].is_array());
}

#[test]
fn text_reports_carry_json() {
    let o = symext(&[corpus("lottery.wb").to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    let machine: Vec<&str> = out.lines().filter_map(|l| l.strip_prefix("json: ")).collect();
    assert_eq!(machine.len(), out.lines().filter(|l| l.starts_with("== ")).count());
    for m in machine {
        serde_json::from_str::<serde_json::Value>(m).unwrap();
    }
}

#[test]
fn every_verb_appears_in_the_corpus() {
    let mut seen = std::collections::BTreeSet::new();
    for f in std::fs::read_dir(corpus("")).unwrap() {
        let o = symext(&[f.unwrap().path().to_str().unwrap(), "--report", "json"]);
        assert!(o.status.success());
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        for r in v.as_array().unwrap() {
            seen.insert(r["verb"].as_str().unwrap().to_string());
        }
    }
    let all = ["validate", "force", "hs", "tenacious", "complete", "iterate", "product", "quotient", "equiv", "suite"];
    assert_eq!(seen, all.iter().map(|s| s.to_string()).collect());
}
