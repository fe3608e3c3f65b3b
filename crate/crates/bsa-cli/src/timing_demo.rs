//! Pulse-level timing demonstration: deform an expected output trace, then
//! score the deformed trace with the integrity (pulse-duration fidelity) and
//! correctness (recovered-value fidelity) metrics.
//!
//! Two ways to get a measured trace: give --measured with one duration per
//! expected 1-pulse, or give fault flags (--stretch, --rise-ns, --fall-ns,
//! --glitch) and let the fault model deform the ideal trace. With neither,
//! the default stream runs a built-in example whose three pulses measure
//! 1.1, 2.1 and 0.4 ns against ideal 1, 2 and 1; any other stream is scored
//! against an undeformed copy of itself.

use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bsa_core::{
    correctness, integrity, perturb, to_trace, BitStream, FaultModel, GlitchSpec, PulseTrace,
    Segment,
};
use serde_json::json;

use crate::report::{OutputArgs, Report};

const DEFAULT_STREAM: &str = "10110001";
const EXAMPLE_PULSES: [f64; 3] = [1.1, 2.1, 0.4];

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Expected output bit stream
    #[arg(long, default_value = DEFAULT_STREAM)]
    stream: String,

    /// Duration of one bit slot in nanoseconds
    #[arg(long, default_value_t = 1.0)]
    bit_ns: f64,

    /// Measured 1-pulse durations in ns, one per expected pulse, replacing
    /// the ideal durations in order
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["stretch", "rise_ns", "fall_ns", "glitch"])]
    measured: Option<Vec<f64>>,

    /// Stretch factor applied to the whole timeline (>= 1)
    #[arg(long, default_value_t = 1.0)]
    stretch: f64,

    /// Rising-edge delay in ns
    #[arg(long, default_value_t = 0.0)]
    rise_ns: f64,

    /// Falling-edge delay in ns
    #[arg(long, default_value_t = 0.0)]
    fall_ns: f64,

    /// Glitch as position:width:level, e.g. 2.5:0.3:0; position and width
    /// may be "rand"; repeatable
    #[arg(long)]
    glitch: Vec<String>,

    /// Seed for randomized glitch fields
    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[command(flatten)]
    output: OutputArgs,
}

fn parse_glitch(s: &str) -> Result<GlitchSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("glitch must be position:width:level, got {s:?}");
    }
    let field = |raw: &str, name: &str| -> Result<Option<f64>> {
        if raw == "rand" {
            return Ok(None);
        }
        let v: f64 = raw
            .parse()
            .with_context(|| format!("glitch {name} must be a number or \"rand\", got {raw:?}"))?;
        Ok(Some(v))
    };
    let level = match parts[2] {
        "0" => false,
        "1" => true,
        other => bail!("glitch level must be 0 or 1, got {other:?}"),
    };
    Ok(GlitchSpec {
        position_ns: field(parts[0], "position")?,
        width_ns: field(parts[1], "width")?,
        level,
    })
}

/// Rebuilds the expected trace with each 1-pulse duration replaced by the
/// next measured duration; 0-gaps keep their ideal length.
fn trace_from_measured(expected: &PulseTrace, measured: &[f64]) -> Result<PulseTrace> {
    let pulses = expected.one_pulse_durations().len();
    if measured.len() != pulses {
        bail!("expected stream has {pulses} one-pulses, got {} measured durations", measured.len());
    }
    let mut next = measured.iter();
    let segments: Vec<Segment> = expected
        .segments()
        .iter()
        .map(|seg| Segment {
            level: seg.level,
            duration_ns: if seg.level {
                *next.next().expect("counted above")
            } else {
                seg.duration_ns
            },
        })
        .collect();
    PulseTrace::new(segments, expected.bit_duration_ns()).map_err(Into::into)
}

pub fn run(args: Args) -> Result<ExitCode> {
    let stream: BitStream = args.stream.parse()?;
    let expected = to_trace(&stream, args.bit_ns)?;

    let glitches = args
        .glitch
        .iter()
        .map(|g| parse_glitch(g))
        .collect::<Result<Vec<_>>>()?;
    let fault = FaultModel {
        stretch_factor: args.stretch,
        rise_delay_ns: args.rise_ns,
        fall_delay_ns: args.fall_ns,
        glitches,
    };
    let fault_requested = fault.stretch_factor != 1.0
        || fault.rise_delay_ns != 0.0
        || fault.fall_delay_ns != 0.0
        || !fault.glitches.is_empty();

    let (mode, measured, dropped) = match (&args.measured, fault_requested) {
        (Some(durations), _) => (
            "measured".to_string(),
            trace_from_measured(&expected, durations)?,
            0usize,
        ),
        (None, true) => {
            let (t, log) = perturb(&expected, &fault, args.seed)?;
            ("fault".to_string(), t, log.dropped_pulses.len())
        }
        (None, false) if args.stream == DEFAULT_STREAM && args.bit_ns == 1.0 => (
            "example".to_string(),
            trace_from_measured(&expected, &EXAMPLE_PULSES)?,
            0usize,
        ),
        (None, false) => ("identity".to_string(), expected.clone(), 0usize),
    };

    let integ = integrity(&measured, &expected);
    let corr = correctness(&measured, stream.value(), args.bit_ns)?;

    let config = json!({
        "stream": args.stream,
        "bit_ns": args.bit_ns,
        "mode": mode,
        "measured": args.measured,
        "stretch": args.stretch,
        "rise_ns": args.rise_ns,
        "fall_ns": args.fall_ns,
        "glitch": args.glitch,
        "seed": args.seed,
    });
    let mut report = Report::new(
        "timing-demo",
        config,
        &[
            "expected_value",
            "integrity_pct",
            "correctness_pct",
            "obtained_value",
            "obtained_ones",
            "dropped_pulses",
            "measured_pulses_ns",
        ],
    );
    let pulses: Vec<String> = measured
        .one_pulse_durations()
        .iter()
        .map(|d| d.to_string())
        .collect();
    report.row(vec![
        json!(stream.value().to_string()),
        json!(integ),
        json!(corr.percentage),
        json!(corr.obtained.to_string()),
        json!(corr.obtained_ones),
        json!(dropped),
        json!(pulses.join(";")),
    ]);
    args.output.write(&report)?;
    Ok(ExitCode::SUCCESS)
}
