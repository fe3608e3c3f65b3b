//! Conventional stochastic computing baseline: LFSR-driven stream generation,
//! AND multiplication, mux scaled addition, and the Monte-Carlo error sweeps
//! that the deterministic units are measured against.
//!
//! The closed-form yardstick: a Bernoulli stream of value p and length n has
//! standard error sqrt(p(1-p)/n) and relative error sqrt((1-p)/(p n)), so
//! halving the error costs a 4x longer stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stream::{BitStream, StreamValue};

/// Maximal-length Fibonacci tap sets per register width. Each entry yields a
/// period of 2^w - 1, which the tests verify by full enumeration.
const MAXIMAL_TAPS: [(u32, &[u32]); 14] = [
    (3, &[3, 2]),
    (4, &[4, 3]),
    (5, &[5, 3]),
    (6, &[6, 5]),
    (7, &[7, 6]),
    (8, &[8, 6, 5, 4]),
    (9, &[9, 5]),
    (10, &[10, 7]),
    (11, &[11, 9]),
    (12, &[12, 6, 4, 1]),
    (13, &[13, 4, 3, 1]),
    (14, &[14, 5, 3, 1]),
    (15, &[15, 14]),
    (16, &[16, 15, 13, 4]),
];

/// Fibonacci LFSR over one of the maximal polynomials above. State is never
/// zero, so values range over 1..=2^w - 1 and repeat with full period.
#[derive(Clone, Debug)]
pub struct Lfsr {
    width: u32,
    taps: &'static [u32],
    state: u64,
}

impl Lfsr {
    /// Width must be in 3..=16. Any seed is accepted; it is folded into a
    /// nonzero state.
    pub fn new(width: u32, seed: u64) -> Result<Self> {
        let taps = MAXIMAL_TAPS
            .iter()
            .find(|(w, _)| *w == width)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("no maximal tap set for width {width}; use 3..=16"))
            })?;
        let period = (1u64 << width) - 1;
        Ok(Self {
            width,
            taps,
            state: (seed % period) + 1,
        })
    }

    /// Smallest width whose value range covers n levels: ceil(log2 n),
    /// clamped into the supported 3..=16 window.
    pub fn width_for_levels(n: usize) -> u32 {
        let bits = (usize::BITS - n.saturating_sub(1).leading_zeros()).max(3);
        bits.min(16)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn max_value(&self) -> u64 {
        (1u64 << self.width) - 1
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    /// Advances one step and returns the new state. Right-shift form: the
    /// feedback bit XORs the state bits at width - t for each tap t, which
    /// realizes the recurrence y[i+w] = XOR of y[i + w - t], maximal whenever
    /// the tap polynomial is primitive.
    pub fn step(&mut self) -> u64 {
        let fb = self
            .taps
            .iter()
            .fold(0u64, |acc, &t| acc ^ (self.state >> (self.width - t)));
        self.state = (self.state >> 1) | ((fb & 1) << (self.width - 1));
        self.state
    }
}

impl Iterator for Lfsr {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let current = self.state;
        self.step();
        Some(current)
    }
}

/// The next `length` LFSR states, starting with the current one.
pub fn lfsr_stream(lfsr: &mut Lfsr, length: usize) -> Vec<u64> {
    lfsr.take(length).collect()
}

/// Stream number generator: compares each random state against the value's
/// threshold. Emits 1 when state * n <= ones * threshold_scale, all in integer
/// arithmetic so the threshold never drifts. With uniform states over
/// 1..=threshold_scale the expected output value approximates ones/n.
pub fn sng(
    v: StreamValue,
    rng: impl IntoIterator<Item = u64>,
    threshold_scale: u64,
) -> Result<BitStream> {
    if threshold_scale == 0 {
        return Err(Error::InvalidArgument("threshold_scale must be > 0".into()));
    }
    let n = v.len();
    let mut out = BitStream::zeros(n as usize);
    let mut consumed = 0usize;
    for (i, state) in rng.into_iter().take(n as usize).enumerate() {
        if state * n <= v.ones() * threshold_scale {
            out.set_bit(i, true);
        }
        consumed += 1;
    }
    if consumed < n as usize {
        return Err(Error::InvalidArgument(format!(
            "rng sequence exhausted after {consumed} of {n} states"
        )));
    }
    Ok(out)
}

/// Stochastic multiplier: bitwise AND. Exact only in expectation, and only
/// when the operand streams are uncorrelated.
pub fn and_multiply(s1: &BitStream, s2: &BitStream) -> Result<BitStream> {
    s1.and(s2)
}

/// Stochastic scaled adder: a mux picks s1 where select is 1, s2 elsewhere.
/// With a half-density select stream the expected value is (p1+p2)/2.
pub fn mux_add(s1: &BitStream, s2: &BitStream, select: &BitStream) -> Result<BitStream> {
    if s1.len() != s2.len() || s1.len() != select.len() {
        return Err(Error::LengthMismatch {
            left: s1.len(),
            right: s2.len().max(select.len()),
        });
    }
    let picked1 = select.and(s1)?;
    let mut out = BitStream::zeros(s1.len());
    for i in 0..s1.len() {
        out.set_bit(i, picked1.bit(i) || (!select.bit(i) && s2.bit(i)));
    }
    Ok(out)
}

/// Standard error and relative error of an n-bit Bernoulli stream of value p.
/// Relative error is undefined at p = 0.
pub fn theorem1_errors(p: f64, n: u64) -> Result<(f64, Option<f64>)> {
    if !(0.0..=1.0).contains(&p) || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "need p in [0,1] and n >= 1, got p={p}, n={n}"
        )));
    }
    let std = (p * (1.0 - p) / n as f64).sqrt();
    let rel = if p > 0.0 {
        Some(((1.0 - p) / (p * n as f64)).sqrt())
    } else {
        None
    };
    Ok((std, rel))
}

/// One bit per draw; the stream value is Binomial(n, p)/n.
pub fn bernoulli_stream(rng: &mut impl Rng, n: usize, p: f64) -> BitStream {
    BitStream::from_fn(n, |_| rng.gen_bool(p))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOp {
    AndMultiply,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub op: SweepOp,
    pub p1: f64,
    pub p2: f64,
    pub n_list: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
}

/// Monte-Carlo error statistics at one stream length.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ErrorStats {
    pub mean_abs_error: f64,
    pub std_error: f64,
    /// mean_abs_error / expected value; None when the expected value is 0.
    pub relative_error: Option<f64>,
    pub trials: u64,
}

const SWEEP_BATCH: u64 = 4096;

/// Derives an independent sub-seed from a base seed and two coordinates
/// (batch indices, sample numbers, and the like), so parallel work items get
/// decorrelated but reproducible randomness.
pub fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    // splitmix64 finalizer over the packed inputs
    let mut z = seed ^ a.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ b.rotate_left(17);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sweeps stochastic operation error over stream lengths. Trials are chunked
/// into fixed batches with per-batch seeds and the batch partials are reduced
/// in batch order, so results do not depend on thread scheduling.
pub fn error_sweep(cfg: &SweepConfig) -> Result<Vec<ErrorStats>> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("trials must be > 0".into()));
    }
    if cfg.n_list.is_empty() {
        return Err(Error::EmptyInput("error_sweep needs at least one n"));
    }
    for p in [cfg.p1, cfg.p2] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("p out of [0,1]: {p}")));
        }
    }
    cfg.n_list
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::InvalidArgument("stream length 0 in n_list".into()));
            }
            let expected = match cfg.op {
                SweepOp::AndMultiply => cfg.p1 * cfg.p2,
            };
            let batches = cfg.trials.div_ceil(SWEEP_BATCH);
            let partials: Vec<(f64, f64, f64)> = (0..batches)
                .into_par_iter()
                .map(|b| {
                    let count = SWEEP_BATCH.min(cfg.trials - b * SWEEP_BATCH);
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, n as u64, b));
                    let (mut abs, mut sum, mut sum_sq) = (0.0, 0.0, 0.0);
                    for _ in 0..count {
                        let s1 = bernoulli_stream(&mut rng, n, cfg.p1);
                        let s2 = bernoulli_stream(&mut rng, n, cfg.p2);
                        let v = match cfg.op {
                            SweepOp::AndMultiply => s1.and(&s2).unwrap().value().as_f64(),
                        };
                        abs += (v - expected).abs();
                        sum += v;
                        sum_sq += v * v;
                    }
                    (abs, sum, sum_sq)
                })
                .collect();
            let (abs, sum, sum_sq) = partials
                .iter()
                .fold((0.0, 0.0, 0.0), |(a, s, q), (pa, ps, pq)| {
                    (a + pa, s + ps, q + pq)
                });
            let t = cfg.trials as f64;
            let mean_abs_error = abs / t;
            let mean = sum / t;
            let var = if cfg.trials > 1 {
                ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
            } else {
                0.0
            };
            Ok(ErrorStats {
                mean_abs_error,
                std_error: var.sqrt(),
                relative_error: (expected > 0.0).then(|| mean_abs_error / expected),
                trials: cfg.trials,
            })
        })
        .collect()
}

/// Empirical mean and standard deviation of n-bit Bernoulli stream values,
/// for checking the closed-form error against simulation.
pub fn value_std_monte_carlo(p: f64, n: usize, trials: u64, seed: u64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&p) || n == 0 || trials < 2 {
        return Err(Error::InvalidArgument(format!(
            "need p in [0,1], n >= 1, trials >= 2; got p={p}, n={n}, trials={trials}"
        )));
    }
    let batches = trials.div_ceil(SWEEP_BATCH);
    let partials: Vec<(f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = SWEEP_BATCH.min(trials - b * SWEEP_BATCH);
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, n as u64, b));
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                let v = bernoulli_stream(&mut rng, n, p).value().as_f64();
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partials
        .iter()
        .fold((0.0, 0.0), |(s, q), (ps, pq)| (s + ps, q + pq));
    let t = trials as f64;
    let mean = sum / t;
    let var = ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0);
    Ok((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_width_has_full_period() {
        for (width, _) in MAXIMAL_TAPS {
            let mut lfsr = Lfsr::new(width, 1).unwrap();
            let start = lfsr.state();
            let period = (1u64 << width) - 1;
            let mut seen = vec![false; (period + 1) as usize];
            for i in 0..period {
                let s = lfsr.state();
                assert_ne!(s, 0, "width {width} hit zero at step {i}");
                assert!(
                    !seen[s as usize],
                    "width {width} repeated state {s} before full period"
                );
                seen[s as usize] = true;
                lfsr.step();
            }
            assert_eq!(lfsr.state(), start, "width {width} period != 2^w - 1");
        }
    }

    #[test]
    fn lfsr_rejects_unsupported_width() {
        assert!(Lfsr::new(2, 1).is_err());
        assert!(Lfsr::new(17, 1).is_err());
    }

    #[test]
    fn width_for_levels_covers_range() {
        assert_eq!(Lfsr::width_for_levels(8), 3);
        assert_eq!(Lfsr::width_for_levels(9), 4);
        assert_eq!(Lfsr::width_for_levels(256), 8);
        assert_eq!(Lfsr::width_for_levels(2), 3);
    }

    #[test]
    fn sng_extremes_are_exact() {
        let mut lfsr = Lfsr::new(4, 9).unwrap();
        let states = lfsr_stream(&mut lfsr, 16);
        let zero = sng(StreamValue::new(0, 16).unwrap(), states.iter().copied(), 15).unwrap();
        assert_eq!(zero.count_ones(), 0);
        let one = sng(StreamValue::new(16, 16).unwrap(), states.iter().copied(), 15).unwrap();
        assert_eq!(one.count_ones(), 16);
    }

    #[test]
    fn sng_half_density_over_full_cycle() {
        // 3-bit LFSR consumed for 8 bits at value 4/8: every state 1..=7
        // appears once, plus one repeat. States <= 3 pass the comparator
        // (state*8 <= 4*7), so the count is 3 plus the repeated state's vote.
        let mut lfsr = Lfsr::new(3, 5).unwrap();
        let states = lfsr_stream(&mut lfsr, 8);
        let expected: u64 = states.iter().map(|&s| u64::from(s * 8 <= 28)).sum();
        let s = sng(StreamValue::new(4, 8).unwrap(), states.iter().copied(), 7).unwrap();
        assert_eq!(s.count_ones(), expected);
        assert_eq!(expected, 3 + u64::from(states[7] <= 3));
    }

    #[test]
    fn sng_errors_when_rng_runs_dry() {
        let v = StreamValue::new(2, 8).unwrap();
        assert!(sng(v, vec![1u64, 2, 3], 7).is_err());
    }

    #[test]
    fn and_multiply_correlation_extremes() {
        // Identical streams: AND returns the stream itself, value p not p*p.
        let s: BitStream = "1010".parse().unwrap();
        assert_eq!(and_multiply(&s, &s).unwrap().value(), s.value());
        // Anti-aligned half-density streams: AND is all zero.
        let a: BitStream = "1010".parse().unwrap();
        let b: BitStream = "0101".parse().unwrap();
        assert_eq!(and_multiply(&a, &b).unwrap().count_ones(), 0);
    }

    #[test]
    fn mux_add_picks_per_slot() {
        let s1: BitStream = "1111".parse().unwrap();
        let s2: BitStream = "0000".parse().unwrap();
        let sel: BitStream = "1100".parse().unwrap();
        assert_eq!(mux_add(&s1, &s2, &sel).unwrap().to_string(), "1100");
        let short: BitStream = "11".parse().unwrap();
        assert!(mux_add(&s1, &s2, &short).is_err());
    }

    #[test]
    fn mux_add_expectation_half_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let trials = 4000;
        let n = 64;
        let mut sum = 0.0;
        for _ in 0..trials {
            let s1 = bernoulli_stream(&mut rng, n, 0.5);
            let s2 = bernoulli_stream(&mut rng, n, 0.5);
            let sel = bernoulli_stream(&mut rng, n, 0.5);
            sum += mux_add(&s1, &s2, &sel).unwrap().value().as_f64();
        }
        let mean = sum / trials as f64;
        // 3 sigma of the mean estimate at var <= 0.25/n per trial
        let tol = 3.0 * (0.25 / (n as f64 * trials as f64)).sqrt();
        assert!((mean - 0.5).abs() < tol, "mean {mean} vs 0.5 +- {tol}");
    }

    #[test]
    fn theorem1_closed_form() {
        let (std, rel) = theorem1_errors(0.25, 100).unwrap();
        assert!((std - (0.25_f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert!((rel.unwrap() - (0.75_f64 / 25.0).sqrt()).abs() < 1e-15);
        let (_, rel0) = theorem1_errors(0.0, 100).unwrap();
        assert!(rel0.is_none());
        assert!(theorem1_errors(1.5, 4).is_err());
    }

    #[test]
    fn theorem1_matches_simulation() {
        let (p, n) = (0.25, 1000);
        let (formula, _) = theorem1_errors(p, n as u64).unwrap();
        let (_, empirical) = value_std_monte_carlo(p, n, 20_000, 33).unwrap();
        assert!(
            (empirical - formula).abs() / formula < 0.05,
            "empirical {empirical} vs formula {formula}"
        );
    }

    #[test]
    fn sweep_error_halves_when_length_quadruples() {
        let cfg = SweepConfig {
            op: SweepOp::AndMultiply,
            p1: 0.5,
            p2: 0.5,
            n_list: vec![16, 64, 256],
            trials: 30_000,
            seed: 7,
        };
        let stats = error_sweep(&cfg).unwrap();
        for w in stats.windows(2) {
            let ratio = w[0].mean_abs_error / w[1].mean_abs_error;
            assert!(
                (ratio / 2.0 - 1.0).abs() < 0.15,
                "expected ~2x error drop per 4x length, got {ratio}"
            );
        }
    }

    #[test]
    fn sweep_is_deterministic_for_fixed_seed() {
        let cfg = SweepConfig {
            op: SweepOp::AndMultiply,
            p1: 0.5,
            p2: 0.25,
            n_list: vec![32],
            trials: 5000,
            seed: 99,
        };
        let a = error_sweep(&cfg).unwrap();
        let b = error_sweep(&cfg).unwrap();
        assert_eq!(a[0].mean_abs_error.to_bits(), b[0].mean_abs_error.to_bits());
        assert_eq!(a[0].std_error.to_bits(), b[0].std_error.to_bits());
    }

    #[test]
    fn sweep_validates_inputs() {
        let mut cfg = SweepConfig {
            op: SweepOp::AndMultiply,
            p1: 0.5,
            p2: 0.5,
            n_list: vec![8],
            trials: 0,
            seed: 0,
        };
        assert!(error_sweep(&cfg).is_err());
        cfg.trials = 10;
        cfg.n_list = vec![];
        assert!(error_sweep(&cfg).is_err());
        cfg.n_list = vec![8];
        cfg.p1 = -0.5;
        assert!(error_sweep(&cfg).is_err());
    }
}
