//! Acceptance run: one line per criterion, then a single assertion over all of them.
//!
//! Criteria 1 to 8 are the in-process verification suites, each under its time budget.
//! Criterion 9 runs every task of the shipped corpus twice through the binary, in both
//! report formats, and compares the bytes.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use symext::suites::{run_suite, SUITES};

fn corpus_files() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
}

fn run_twice(file: &PathBuf, format: &str) -> Result<(), String> {
    let once = || {
        Command::new(env!("CARGO_BIN_EXE_symext"))
            .arg(file)
            .args(["--report", format])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (once()?, once()?);
    if !a.status.success() {
        return Err(format!("{} exited with {:?}", file.display(), a.status.code()));
    }
    if a.stdout != b.stdout || a.stdout.is_empty() {
        return Err(format!("{} ({format}) differs between runs", file.display()));
    }
    Ok(())
}

fn determinism() -> Result<String, String> {
    let files = corpus_files();
    for f in &files {
        run_twice(f, "text")?;
        run_twice(f, "json")?;
    }
    Ok(format!("{} corpus files, text and json", files.len()))
}

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    for &(n, title, _) in SUITES.iter() {
        let start = Instant::now();
        let outcome = run_suite(n).expect("suite exists");
        let elapsed = start.elapsed();
        let in_time = elapsed <= outcome.budget();
        let ok = outcome.passed() && in_time;
        println!(
            "criterion {n} ({title}): {} [{} checks, {} failed, {:.2?} of {:?}]",
            if ok { "PASS" } else { "FAIL" },
            outcome.checks,
            outcome.failed,
            elapsed,
            outcome.budget()
        );
        for f in &outcome.failures {
            println!("    {f}");
        }
        if !ok {
            failed.push(n);
        }
    }
    match determinism() {
        Ok(detail) => println!("criterion 9 (determinism): PASS [{detail}]"),
        Err(e) => {
            println!("criterion 9 (determinism): FAIL [{e}]");
            failed.push(9);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
