//! `rrw-qbd` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | model validation failed |
//! | 2 | model file or command line could not be parsed |
//! | 3 | walk is not stable |
//! | 4 | negative face drift fails, or no feasible tilt |
//! | 5 | oracle window exceeds the memory guard |
//! | 6 | `verify` reported a FAIL |
//! | 7 | numerical failure (solver did not converge, singular system) |

mod args;
mod commands;
mod pipeline;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use pipeline::{CliError, Output};

pub const THREADS_ENV: &str = "RRW_QBD_THREADS";

fn configure_threads() {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            // fails only if a pool already exists, which cannot happen here
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => eprintln!("warning: ignoring {THREADS_ENV}={raw:?}; expected a positive integer"),
    }
}

fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Validate(a) => commands::validate(&a),
        Command::Drifts(a) => commands::drifts(&a),
        Command::Stability(a) => commands::stability(&a),
        Command::Theta(a) => commands::theta(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Bound(a) => commands::bound(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Simulate(a) => commands::simulate(&a),
    }
}

fn emit(out: &Output) -> Result<(), CliError> {
    match &out.path {
        Some(p) => std::fs::write(p, &out.body)
            .map_err(|e| CliError::parse(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(out.body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::parse(format!("cannot write to stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = run(cli).and_then(|out| {
        emit(&out)?;
        Ok(out)
    });
    match result {
        Ok(out) => {
            if let Some(msg) = &out.message {
                eprintln!("{msg}");
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
