//! Command-line front end: argument parsing, provenance stamping and the
//! machine-readable error contract.
//!
//! Every artifact carries the tool version, master seed and a SHA-256 digest
//! of the subcommand arguments. Failures print one JSON object
//! `{"error": {"kind": ..., "message": ...}}` to stderr and exit nonzero.

pub mod args;
mod commands;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::Result;
use clap::Parser;
use serde::Serialize;

pub use args::{Cli, Command};
use output::{Outputs, RunInfo};

/// Exit status for failures after argument parsing succeeded.
pub const EXIT_FAILURE: i32 = 1;
/// Exit status for unusable command lines.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub info: RunInfo,
    pub written: Vec<PathBuf>,
    /// Text meant for the terminal, if the subcommand produces any.
    pub message: Option<String>,
}

/// Executes one parsed command line.
pub fn run(cli: &Cli) -> Result<RunOutcome> {
    let info = RunInfo::new(&cli.command, cli.seed)?;
    let mut out = Outputs::new(&cli.out_dir, info)?;
    let work = |out: &mut Outputs| -> Result<Option<String>> {
        match &cli.command {
            Command::Gen(a) => commands::gen(a, out)?,
            Command::Fit(a) => commands::fit(a, out)?,
            Command::Eval(a) => commands::eval(a, out)?,
            Command::Gof(a) => commands::gof(a, out)?,
            Command::Tails(a) => commands::tails(a, out)?,
            Command::SimPvalues(a) => commands::sim_pvalues(a, out)?,
            Command::SimToy(a) => commands::sim_toy(a, out)?,
            Command::Thresholds(a) => commands::thresholds(a, out)?,
            Command::Report(a) => return Ok(Some(commands::report(a, out)?)),
        }
        Ok(None)
    };
    let message = match cli.workers {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(|| work(&mut out))?,
        None => work(&mut out)?,
    };
    Ok(RunOutcome { info: out.info, written: out.written, message })
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

/// `{"error": {"kind", "message"}}` for a failure.
pub fn error_json(kind: &str, message: String) -> String {
    serde_json::json!({ "error": ErrorBody { kind, message } }).to_string()
}

/// Stable tag for an error chain: the library's error kind when one is
/// present, else a coarse category.
pub fn error_kind(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<tailratio::Error>() {
            return e.kind();
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "io";
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return "json";
        }
    }
    "error"
}

/// Parses `args`, runs the command and reports on stdout/stderr; returns the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("{}", error_json("usage", e.to_string().trim_end().to_string()));
            return EXIT_USAGE;
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if let Some(msg) = &outcome.message {
                println!("{msg}");
            }
            for p in &outcome.written {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", error_json(error_kind(&e), format!("{e:#}")));
            EXIT_FAILURE
        }
    }
}
