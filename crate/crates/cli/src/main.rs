//! `firmnet`: generation, ingestion, information dynamics and cascade
//! simulation for interfirm networks, with a reproducibility manifest in every
//! output directory.

mod args;
mod commands;
mod config;
mod manifest;

use std::process::ExitCode;

use clap::Parser;
use firmnet_core::Error;

use args::Cli;

/// Usage and configuration problems.
const EXIT_USAGE: u8 = 2;
/// Input data that violates a precondition.
const EXIT_DATA: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::InvalidParam(_) | Error::YearOutOfWindow { .. } => EXIT_USAGE,
                _ => EXIT_DATA,
            };
        }
        if cause.downcast_ref::<args::UsageError>().is_some() {
            return EXIT_USAGE;
        }
    }
    EXIT_DATA
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let raw: Vec<String> = std::env::args().collect();
    let argv = match config::merge_config(&raw) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(&argv.effective) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match commands::dispatch(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
