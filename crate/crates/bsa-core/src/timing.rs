//! Timing view of a bit stream: the wire as alternating voltage levels with
//! real durations, a fault model that deforms them, and two recovery metrics.
//!
//! Pulse integrity asks "how far did each 1-pulse drift from its ideal
//! duration"; correctness asks "after rounding each 1-pulse back to whole bit
//! slots, how much of the intended count survives". A signal can score high
//! on one and poorly on the other, which is the point of keeping both.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::{BitStream, StreamValue};

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct Segment {
    pub level: bool,
    pub duration_ns: f64,
}

/// A normalized run-length trace: positive durations, strictly alternating
/// levels, plus the nominal bit duration it was emitted at.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct PulseTrace {
    segments: Vec<Segment>,
    bit_duration_ns: f64,
}

impl PulseTrace {
    /// Builds a trace from raw segments, merging adjacent same-level runs.
    /// Durations must be positive and finite.
    // The negated comparisons are load-bearing: `!(x > 0.0)` also rejects NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(segments: Vec<Segment>, bit_duration_ns: f64) -> Result<Self> {
        if !(bit_duration_ns > 0.0) || !bit_duration_ns.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bit duration must be positive and finite, got {bit_duration_ns}"
            )));
        }
        if segments.is_empty() {
            return Err(Error::EmptyInput("a trace needs at least one segment"));
        }
        let mut merged: Vec<Segment> = Vec::with_capacity(segments.len());
        for seg in segments {
            if !(seg.duration_ns > 0.0) || !seg.duration_ns.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "segment duration must be positive and finite, got {}",
                    seg.duration_ns
                )));
            }
            match merged.last_mut() {
                Some(last) if last.level == seg.level => last.duration_ns += seg.duration_ns,
                _ => merged.push(seg),
            }
        }
        Ok(Self {
            segments: merged,
            bit_duration_ns,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn bit_duration_ns(&self) -> f64 {
        self.bit_duration_ns
    }

    pub fn total_duration_ns(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_ns).sum()
    }

    /// Durations of the 1-level runs, in order.
    pub fn one_pulse_durations(&self) -> Vec<f64> {
        self.segments
            .iter()
            .filter(|s| s.level)
            .map(|s| s.duration_ns)
            .collect()
    }

    /// 1-pulses as (start, end) intervals over a level-0 background.
    fn one_pulses(&self) -> Vec<(f64, f64)> {
        let mut t = 0.0;
        let mut pulses = Vec::new();
        for seg in &self.segments {
            if seg.level {
                pulses.push((t, t + seg.duration_ns));
            }
            t += seg.duration_ns;
        }
        pulses
    }

    /// CSV with a `level,duration_ns` header, one segment per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,duration_ns\n");
        for seg in &self.segments {
            out.push_str(&format!("{},{}\n", seg.level as u8, seg.duration_ns));
        }
        out
    }

    pub fn from_csv(text: &str, bit_duration_ns: f64) -> Result<Self> {
        let mut segments = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line == "level,duration_ns" {
                continue;
            }
            let (level, duration) = line.split_once(',').ok_or_else(|| {
                Error::Parse(format!("trace CSV line {}: expected level,duration", i + 1))
            })?;
            let level = match level.trim() {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Parse(format!(
                        "trace CSV line {}: bad level {other:?}",
                        i + 1
                    )))
                }
            };
            let duration_ns: f64 = duration
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("trace CSV line {}: {e}", i + 1)))?;
            segments.push(Segment { level, duration_ns });
        }
        Self::new(segments, bit_duration_ns)
    }
}

/// Renders a stream as an ideal trace: each bit holds its level for exactly
/// one bit duration.
pub fn to_trace(s: &BitStream, bit_duration_ns: f64) -> Result<PulseTrace> {
    let segments = s
        .iter()
        .map(|b| Segment {
            level: b,
            duration_ns: bit_duration_ns,
        })
        .collect();
    PulseTrace::new(segments, bit_duration_ns)
}

/// One spliced glitch. Position and width may be left unspecified for sweep
/// use, in which case `perturb` samples them from its seed; widths stay
/// below one bit duration either way.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct GlitchSpec {
    pub position_ns: Option<f64>,
    pub width_ns: Option<f64>,
    pub level: bool,
}

/// Deterministic deformation of a trace: uniform time stretch, separate
/// rising/falling edge delays, and spliced glitches.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct FaultModel {
    pub stretch_factor: f64,
    pub rise_delay_ns: f64,
    pub fall_delay_ns: f64,
    pub glitches: Vec<GlitchSpec>,
}

impl FaultModel {
    pub fn identity() -> Self {
        Self {
            stretch_factor: 1.0,
            rise_delay_ns: 0.0,
            fall_delay_ns: 0.0,
            glitches: Vec::new(),
        }
    }

    // The negated comparisons are load-bearing: `!(x >= 0.0)` also rejects NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    fn validate(&self, bit_duration_ns: f64) -> Result<()> {
        if !(self.stretch_factor >= 1.0) || !self.stretch_factor.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "stretch factor must be >= 1, got {}",
                self.stretch_factor
            )));
        }
        for d in [self.rise_delay_ns, self.fall_delay_ns] {
            if !(d >= 0.0) || !d.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "edge delays must be >= 0, got {d}"
                )));
            }
        }
        for g in &self.glitches {
            if let Some(w) = g.width_ns {
                if !(w > 0.0) || w >= bit_duration_ns {
                    return Err(Error::InvalidArgument(format!(
                        "glitch width must be in (0, bit_duration), got {w}"
                    )));
                }
            }
            if let Some(p) = g.position_ns {
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "glitch position must be >= 0, got {p}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// What perturbation removed: pulses whose deformed duration collapsed to
/// zero or below.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PerturbLog {
    pub dropped_pulses: Vec<(f64, f64)>,
}

/// Applies a fault model. Stretch scales the whole timeline, rise delay
/// shifts every pulse start, fall delay every pulse end, and glitches splice
/// a 1-pulse in (level 1) or carve a hole (level 0). Collapsed pulses are
/// deleted and logged. The seed only matters when a glitch leaves position
/// or width unspecified.
pub fn perturb(trace: &PulseTrace, fault: &FaultModel, seed: u64) -> Result<(PulseTrace, PerturbLog)> {
    fault.validate(trace.bit_duration_ns())?;
    let mut log = PerturbLog::default();
    let stretch = fault.stretch_factor;
    let span = trace.total_duration_ns() * stretch;

    let mut pulses: Vec<(f64, f64)> = Vec::new();
    for (s, e) in trace.one_pulses() {
        let (s, e) = (
            s * stretch + fault.rise_delay_ns,
            e * stretch + fault.fall_delay_ns,
        );
        if e - s > 0.0 {
            pulses.push((s, e));
        } else {
            log.dropped_pulses.push((s, e));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for g in &fault.glitches {
        let width = g
            .width_ns
            .unwrap_or_else(|| trace.bit_duration_ns() * rng.gen_range(0.1..0.9));
        let position = g.position_ns.unwrap_or_else(|| rng.gen_range(0.0..span));
        let (gs, ge) = (position, position + width);
        if g.level {
            pulses.push((gs, ge));
        } else {
            let mut carved = Vec::with_capacity(pulses.len() + 1);
            for (s, e) in pulses.drain(..) {
                if ge <= s || gs >= e {
                    carved.push((s, e));
                    continue;
                }
                if gs > s {
                    carved.push((s, gs));
                }
                if ge < e {
                    carved.push((ge, e));
                }
                if gs <= s && ge >= e {
                    log.dropped_pulses.push((s, e));
                }
            }
            pulses = carved;
        }
    }

    pulses.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pulses.len());
    for (s, e) in pulses {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }

    let mut segments = Vec::with_capacity(2 * merged.len() + 1);
    let mut t = 0.0;
    for (s, e) in &merged {
        if *s > t {
            segments.push(Segment {
                level: false,
                duration_ns: s - t,
            });
        }
        segments.push(Segment {
            level: true,
            duration_ns: e - s,
        });
        t = *e;
    }
    let end = span.max(t);
    if end > t || segments.is_empty() {
        segments.push(Segment {
            level: false,
            duration_ns: (end - t).max(f64::MIN_POSITIVE),
        });
    }
    Ok((PulseTrace::new(segments, trace.bit_duration_ns())?, log))
}

/// Pulse integrity: 100% minus the mean relative drift of the 1-pulse
/// durations, floored at zero. A missing or extra pulse is an immediate 0%,
/// since pairing the durations is then meaningless.
pub fn integrity(measured: &PulseTrace, expected: &PulseTrace) -> f64 {
    let m = measured.one_pulse_durations();
    let e = expected.one_pulse_durations();
    if m.len() != e.len() {
        return 0.0;
    }
    if e.is_empty() {
        return 100.0;
    }
    let mean_dev: f64 = m
        .iter()
        .zip(&e)
        .map(|(m, e)| (m - e).abs() / e)
        .sum::<f64>()
        / e.len() as f64;
    (1.0 - mean_dev).max(0.0) * 100.0
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CorrectnessResult {
    /// Recovered value at the expected resolution, ones clamped to n.
    pub obtained: StreamValue,
    /// Raw recovered 1-count before clamping.
    pub obtained_ones: u64,
    pub percentage: f64,
}

/// Correctness: round each measured 1-pulse to whole bit slots (half away
/// from zero), sum the slots, and compare against the expected 1-count.
// `!(x > 0.0)` instead of `x <= 0.0`: the negated form also rejects NaN.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn correctness(
    measured: &PulseTrace,
    expected_value: StreamValue,
    bit_duration_ns: f64,
) -> Result<CorrectnessResult> {
    if !(bit_duration_ns > 0.0) || !bit_duration_ns.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bit duration must be positive and finite, got {bit_duration_ns}"
        )));
    }
    let obtained_ones: u64 = measured
        .one_pulse_durations()
        .iter()
        .map(|d| (d / bit_duration_ns + 0.5).floor() as u64)
        .sum();
    let expected_k = expected_value.ones();
    let percentage = if expected_k == 0 {
        if obtained_ones == 0 {
            100.0
        } else {
            0.0
        }
    } else {
        let miss = obtained_ones.abs_diff(expected_k) as f64 / expected_k as f64;
        (1.0 - miss).clamp(0.0, 1.0) * 100.0
    };
    Ok(CorrectnessResult {
        obtained: StreamValue::new(obtained_ones.min(expected_value.len()), expected_value.len())
            .expect("clamped count is always valid"),
        obtained_ones,
        percentage,
    })
}
