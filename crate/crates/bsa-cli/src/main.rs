//! Command line front end for the bit-stream arithmetic workbench.

mod error_sweep;
mod gen_dataset;
mod nn_eval;
mod nn_train;
mod oracle_check;
mod report;
mod timing_demo;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Bit-stream arithmetic workbench: deterministic adder and multiplier
/// verification against exact oracles, stochastic baselines, pulse-timing
/// fault metrics, and neural-network inference sweeps.
#[derive(Parser, Debug)]
#[command(name = "bsa", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check deterministic units against the exact oracle and their bounds
    OracleCheck(oracle_check::Args),
    /// Monte-Carlo error sweep of the stochastic AND multiplier
    ErrorSweep(error_sweep::Args),
    /// Deform a pulse trace and score integrity and correctness
    TimingDemo(timing_demo::Args),
    /// Evaluate the digit classifier across backends and stream lengths
    NnEval(nn_eval::Args),
    /// Train the digit classifier and write a weights file
    NnTrain(nn_train::Args),
    /// Generate a synthetic dataset in pendigits CSV layout
    GenDataset(gen_dataset::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::OracleCheck(args) => oracle_check::run(args),
        Command::ErrorSweep(args) => error_sweep::run(args),
        Command::TimingDemo(args) => timing_demo::run(args),
        Command::NnEval(args) => nn_eval::run(args),
        Command::NnTrain(args) => nn_train::run(args),
        Command::GenDataset(args) => gen_dataset::run(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
