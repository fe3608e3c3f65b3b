//! Monte-Carlo error sweep of the stochastic AND multiplier across stream
//! lengths: random Bernoulli operand streams, error measured against the
//! exact product.

use std::process::ExitCode;

use anyhow::Result;
use bsa_core::stochastic::{error_sweep, SweepConfig, SweepOp};
use serde_json::{json, Value};

use crate::report::{OutputArgs, Report};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Stream lengths to sweep
    #[arg(long = "n", value_delimiter = ',', default_value = "16,64,256,1024")]
    n: Vec<usize>,

    /// Monte-Carlo trials per stream length
    #[arg(long, default_value_t = 100_000)]
    trials: u64,

    /// Seed for the operand streams
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Value of the first operand (probability of a 1 per slot)
    #[arg(long, default_value_t = 0.5)]
    p1: f64,

    /// Value of the second operand
    #[arg(long, default_value_t = 0.5)]
    p2: f64,

    #[command(flatten)]
    output: OutputArgs,
}

pub fn run(args: Args) -> Result<ExitCode> {
    let cfg = SweepConfig {
        op: SweepOp::AndMultiply,
        p1: args.p1,
        p2: args.p2,
        n_list: args.n.clone(),
        trials: args.trials,
        seed: args.seed,
    };
    let stats = error_sweep(&cfg)?;

    let config = json!({
        "op": "and_multiply",
        "p1": args.p1,
        "p2": args.p2,
        "n": args.n,
        "trials": args.trials,
        "seed": args.seed,
    });
    let mut report = Report::new(
        "error-sweep",
        config,
        &["n", "mean_abs_error", "std_error", "relative_error", "trials", "seed"],
    );
    for (n, s) in args.n.iter().zip(&stats) {
        report.row(vec![
            json!(n),
            json!(s.mean_abs_error),
            json!(s.std_error),
            s.relative_error.map_or(Value::Null, |r| json!(r)),
            json!(s.trials),
            json!(args.seed),
        ]);
    }
    args.output.write(&report)?;
    Ok(ExitCode::SUCCESS)
}
