//! Checks every requested unit against the exact arithmetic oracle: an
//! exhaustive pass over all (k1, k2) value pairs on canonical streams, plus
//! seeded random-ordering trials, with the worst observed error compared to
//! the unit's deterministic bound in exact rational arithmetic.

use std::process::ExitCode;

use anyhow::{bail, Result};
use bsa_core::{
    canonical_stream, error_bound, evaluate_unit, ideal_value, BitStream, StreamValue, UnitKind,
    MAX_UNIT_INPUT_LEN,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{OutputArgs, Report};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Units to check, comma separated; "all" means the six deterministic
    /// units
    #[arg(long, value_delimiter = ',', default_value = "all")]
    units: Vec<String>,

    /// Input stream lengths to check
    #[arg(long = "n", value_delimiter = ',', default_value = "4,8,16")]
    n: Vec<usize>,

    /// Random shuffled-input trials per unit and length, on top of the
    /// exhaustive canonical pass
    #[arg(long, default_value_t = 200)]
    trials: u64,

    /// Seed for the shuffled-input trials
    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[command(flatten)]
    output: OutputArgs,
}

/// Why a unit cannot run at this length, if it cannot.
fn unsupported_reason(kind: UnitKind, n: usize) -> Option<String> {
    if n == 0 {
        return Some("stream length must be >= 1".into());
    }
    if n > MAX_UNIT_INPUT_LEN {
        return Some(format!("input length exceeds the {MAX_UNIT_INPUT_LEN}-slot cap"));
    }
    if kind.output_len(n) > MAX_UNIT_INPUT_LEN {
        return Some(format!(
            "{}-slot output would exceed the {MAX_UNIT_INPUT_LEN}-slot cap",
            kind.output_len(n)
        ));
    }
    match kind {
        UnitKind::Sisa | UnitKind::Sism if n < 2 || !n.is_power_of_two() => {
            Some("needs a power-of-two stream length (>= 2)".into())
        }
        UnitKind::Scsm if n < 2 || !n.is_multiple_of(2) => {
            Some("needs an even stream length (>= 2)".into())
        }
        _ => None,
    }
}

fn random_stream(ones: usize, len: usize, rng: &mut ChaCha8Rng) -> BitStream {
    let mut bits: Vec<bool> = (0..len).map(|i| i < ones).collect();
    bits.shuffle(rng);
    BitStream::from_bools(&bits)
}

/// |v - ideal| as an exact fraction over a common denominator.
fn abs_error(v: StreamValue, ideal: StreamValue) -> (u128, u128) {
    let num = (v.ones() as u128 * ideal.len() as u128)
        .abs_diff(ideal.ones() as u128 * v.len() as u128);
    (num, v.len() as u128 * ideal.len() as u128)
}

fn fraction_gt(a: (u128, u128), b: (u128, u128)) -> bool {
    a.0 * b.1 > b.0 * a.1
}

struct UnitOutcome {
    pairs: u64,
    max_error: (u128, u128),
    violation: Option<String>,
}

fn check_unit(kind: UnitKind, n: usize, trials: u64, seed: u64) -> Result<UnitOutcome> {
    let (bnum, bden) = error_bound(kind, n).expect("deterministic unit has a bound");
    let mut outcome = UnitOutcome {
        pairs: 0,
        max_error: (0, 1),
        violation: None,
    };
    let check = |s1: &BitStream, s2: &BitStream, out: &mut UnitOutcome| -> Result<()> {
        let got = evaluate_unit(kind, &[s1.clone(), s2.clone()])?.value();
        let ideal = ideal_value(kind, &[s1.value(), s2.value()])?;
        out.pairs += 1;
        let err = abs_error(got, ideal);
        if fraction_gt(err, out.max_error) {
            out.max_error = err;
        }
        if !got.diff_within(ideal, bnum, bden) && out.violation.is_none() {
            out.violation = Some(format!(
                "k1={} k2={} gave {got}, ideal {ideal}, bound {bnum}/{bden}",
                s1.count_ones(),
                s2.count_ones()
            ));
        }
        Ok(())
    };

    for k1 in 0..=n {
        for k2 in 0..=n {
            let s1 = canonical_stream(StreamValue::new(k1 as u64, n as u64)?);
            let s2 = canonical_stream(StreamValue::new(k2 as u64, n as u64)?);
            check(&s1, &s2, &mut outcome)?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (kind as u64) << 32 ^ n as u64);
    for _ in 0..trials {
        let s1 = random_stream(rng.gen_range(0..=n), n, &mut rng);
        let s2 = random_stream(rng.gen_range(0..=n), n, &mut rng);
        check(&s1, &s2, &mut outcome)?;
    }
    Ok(outcome)
}

pub fn run(args: Args) -> Result<ExitCode> {
    let mut units: Vec<UnitKind> = Vec::new();
    for name in &args.units {
        if name == "all" {
            for kind in UnitKind::DETERMINISTIC {
                if !units.contains(&kind) {
                    units.push(kind);
                }
            }
            continue;
        }
        let kind = UnitKind::parse(name)?;
        if !units.contains(&kind) {
            units.push(kind);
        }
    }
    if units.is_empty() {
        bail!("no units requested");
    }
    if args.n.is_empty() {
        bail!("no stream lengths requested");
    }

    let config = json!({
        "units": units.iter().map(|k| k.name()).collect::<Vec<_>>(),
        "n": args.n,
        "trials": args.trials,
        "seed": args.seed,
    });
    let mut report = Report::new(
        "oracle-check",
        config,
        &["unit", "n", "status", "pairs", "max_abs_error", "bound", "note"],
    );

    let (mut ok, mut violations, mut skipped) = (0u64, 0u64, 0u64);
    for &kind in &units {
        for &n in &args.n {
            if matches!(kind, UnitKind::StochAnd | UnitKind::StochMux) {
                skipped += 1;
                report.row(vec![
                    json!(kind.name()),
                    json!(n),
                    json!("skipped"),
                    Value::Null,
                    Value::Null,
                    Value::Null,
                    json!("stochastic unit, no deterministic bound to check"),
                ]);
                continue;
            }
            if let Some(reason) = unsupported_reason(kind, n) {
                skipped += 1;
                report.row(vec![
                    json!(kind.name()),
                    json!(n),
                    json!("skipped"),
                    Value::Null,
                    Value::Null,
                    Value::Null,
                    json!(reason),
                ]);
                continue;
            }
            let (bnum, bden) = error_bound(kind, n).expect("deterministic bound");
            let outcome = check_unit(kind, n, args.trials, args.seed)?;
            let status = if outcome.violation.is_some() {
                violations += 1;
                "violation"
            } else {
                ok += 1;
                "ok"
            };
            report.row(vec![
                json!(kind.name()),
                json!(n),
                json!(status),
                json!(outcome.pairs),
                json!(outcome.max_error.0 as f64 / outcome.max_error.1 as f64),
                json!(bnum as f64 / bden as f64),
                json!(outcome.violation.unwrap_or_default()),
            ]);
        }
    }

    args.output.write(&report)?;
    eprintln!("oracle-check: {ok} ok, {violations} violations, {skipped} skipped");
    if violations > 0 {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}
