//! Command-line front end: noise generation, seed recovery, modifier
//! recovery and the statistics workflows, each writing a JSON run report.

mod args;
mod commands;
mod error;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = match cli.workers {
        Some(0) => {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(2);
        }
        Some(n) => n,
        None => seedscan::search::default_workers(),
    };
    let outcome: Result<(), CliError> = match &cli.command {
        Command::GenNoise(a) => commands::gen_noise(a),
        Command::RecoverSeed(a) => commands::recover_seed(a, workers),
        Command::GaRecover(a) => commands::ga_recover(a, workers),
        Command::Stats(a) => commands::stats(a),
        Command::ServeMockOracle(a) => commands::serve_mock_oracle(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
