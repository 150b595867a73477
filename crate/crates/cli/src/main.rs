//! `meibo`: analyze meibography images, score segmentations, generate phantoms.

mod analyze;
mod args;
mod eval;
mod phantom;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Every image analyzed.
const EXIT_OK: u8 = 0;
/// Bad arguments, unreadable configuration or a fatal command error.
const EXIT_USAGE: u8 = 1;
/// Some images of a batch failed; the others were written.
const EXIT_PARTIAL: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("MEIBO_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_OK);
        }
    };
    let outcome = match cli.command {
        Command::Analyze(a) => analyze::run(&a),
        Command::Eval(a) => eval::run(&a).map(|()| true),
        Command::Phantom(a) => phantom::run(&a).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::from(EXIT_OK),
        Ok(false) => ExitCode::from(EXIT_PARTIAL),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
