//! `symext`: runs workbench files.
//!
//! `symext FILE` runs the tasks listed in the file; `symext FILE VERB ARGS...` runs one
//! verb. Exit codes: 1 for bad input, 2 for an unknown verb, 3 for an unresolved
//! reference, 4 when a guard is exceeded.

mod document;
mod verbs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use symext::Error;

use document::{set_guard, Document, Task};
use verbs::{run, Failure, Options, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "symext", version, about = "Finite symmetric systems workbench")]
struct Cli {
    /// Workbench file.
    input: PathBuf,
    /// Verb and its arguments; without one, the file's tasks run in order.
    task: Vec<String>,
    /// Rank bound for names and models.
    #[arg(long)]
    rank: Option<usize>,
    /// Guard override, `key=value` with key poset, group, names or rank.
    #[arg(long = "guard", value_name = "KEY=VALUE")]
    guards: Vec<String>,
    #[arg(long, value_enum, default_value = "text")]
    report: Format,
    /// Name class for `equiv`: HS, HR or N.
    #[arg(long)]
    class: Option<String>,
}

fn exit_code(e: &Failure) -> u8 {
    match e {
        Failure::Verb(_) => 2,
        Failure::Lib(Error::Unresolved(_)) => 3,
        Failure::Lib(Error::GuardExceeded { .. }) => 4,
        Failure::Lib(_) => 1,
    }
}

fn message(e: &Failure) -> String {
    match e {
        Failure::Verb(v) => format!("unknown verb `{}` (expected one of {})", v.0, verbs::VERBS.join(", ")),
        Failure::Lib(e) => e.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.input.display());
            return ExitCode::from(1);
        }
    };
    let mut doc = match Document::parse(&text) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&Failure::Lib(e)));
        }
    };
    for g in &cli.guards {
        let parsed = g.split_once('=').and_then(|(k, v)| Some((k, v.parse::<u64>().ok()?)));
        let Some((k, v)) = parsed else {
            eprintln!("error: guard `{g}` is not key=value");
            return ExitCode::from(1);
        };
        if let Err(e) = set_guard(&mut doc.guards, k, v) {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let tasks = match cli.task.split_first() {
        Some((verb, args)) => vec![Task { verb: verb.clone(), args: args.to_vec(), rank: None, class: None }],
        None => doc.tasks.clone(),
    };
    let opts = Options { rank: cli.rank, class: cli.class.clone() };
    let mut reports: Vec<Report> = Vec::new();
    let mut failure = None;
    for task in &tasks {
        match run(&doc, task, &opts) {
            Ok(r) => reports.push(r),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    match cli.report {
        Format::Text => reports.iter().for_each(|r| print!("{}", r.text())),
        Format::Json => {
            let all: Vec<_> = reports.iter().map(|r| r.data.clone()).collect();
            println!("{}", serde_json::to_string_pretty(&all).expect("reports serialize"));
        }
    }
    match failure {
        Some(e) => {
            eprintln!("error: {}", message(&e));
            ExitCode::from(exit_code(&e))
        }
        None => ExitCode::SUCCESS,
    }
}
