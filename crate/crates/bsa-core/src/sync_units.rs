//! Synchronous units. Two families:
//!
//! - Increasing-length (SISA, SISM): count an input window, latch the count,
//!   regenerate it in a canonical layout. Fully accurate, output longer than
//!   the input.
//! - Constant-length (SCSA, SCSM): keep a bounded carry and emit one bit per
//!   input slot. Output value lands within 0.5/n of the ideal result, the
//!   cost of never growing the stream.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stream::{canonical_stream, BitStream, StreamValue};

fn require_equal(s1: &BitStream, s2: &BitStream) -> Result<usize> {
    if s1.len() != s2.len() {
        return Err(Error::LengthMismatch {
            left: s1.len(),
            right: s2.len(),
        });
    }
    Ok(s1.len())
}

fn require_pow2(unit: &'static str, n: usize) -> Result<u32> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::UnsupportedLength {
            unit,
            n,
            reason: "the divided-clock select logic needs a power-of-two length (>= 2)",
        });
    }
    Ok(n.trailing_zeros())
}

/// Counter-register-mux adder. While the first operand is being counted, the
/// second operand passes straight through to the first n output slots. The
/// latched count k1 then plays out over the last n slots in binary-weighted
/// segments: one slot for the low register bit, one for the full-scale bit,
/// then 2, 4, ..., n/2 slots for the remaining bits, with the full-scale bit
/// ORed into every segment so k1 = n renders as all ones.
pub fn sisa_add(s1: &BitStream, s2: &BitStream) -> Result<BitStream> {
    let n = require_equal(s1, s2)?;
    let m = require_pow2("sisa", n)?;
    let k1 = s1.count_ones();
    let msb = k1 == n as u64;
    let mut out = BitStream::zeros(2 * n);
    out.copy_range(0, s2, 0, n);
    let mut pos = n;
    out.set_bit(pos, k1 & 1 == 1 || msb);
    pos += 1;
    out.set_bit(pos, msb);
    pos += 1;
    for j in 1..m {
        let seg = 1usize << j;
        out.fill_range(pos, seg, (k1 >> j) & 1 == 1 || msb);
        pos += seg;
    }
    debug_assert_eq!(pos, 2 * n);
    Ok(out)
}

/// Regenerate-and-select multiplier. Both operands are counted and replayed
/// canonically; output slot t pairs the fast replay of input 1 (index
/// t mod n) with the slow replay of input 2 (index t/n), so every bit pair
/// meets exactly once and the n*n output is exact.
pub fn sism_multiply(s1: &BitStream, s2: &BitStream) -> Result<BitStream> {
    let n = require_equal(s1, s2)?;
    require_pow2("sism", n)?;
    let u1 = canonical_stream(s1.value());
    let k2 = s2.count_ones() as usize;
    let mut out = BitStream::zeros(n * n);
    for block in 0..k2 {
        out.copy_range(block * n, &u1, 0, n);
    }
    Ok(out)
}

/// One slot of a constant-length unit trace: inputs seen, carry after the
/// slot, bit emitted.
#[derive(Clone, Debug, Serialize)]
pub struct StepTrace {
    pub step: usize,
    pub inputs: Vec<u8>,
    pub carry: i64,
    pub output: u8,
}

/// Two-input constant-length adder. Equal slot bits pass through (their sum
/// is even); on a mismatch the carry bit is emitted and flipped, so every two
/// mismatches produce exactly one 1. The output value is within 0.5/n of
/// (k1+k2)/2n and exact whenever k1 and k2 have the same parity, regardless
/// of bit order.
pub fn scsa_add2(s1: &BitStream, s2: &BitStream, initial_carry: bool) -> Result<BitStream> {
    Ok(scsa_add2_traced(s1, s2, initial_carry)?.0)
}

pub fn scsa_add2_traced(
    s1: &BitStream,
    s2: &BitStream,
    initial_carry: bool,
) -> Result<(BitStream, Vec<StepTrace>)> {
    let n = require_equal(s1, s2)?;
    let mut out = BitStream::zeros(n);
    let mut trace = Vec::with_capacity(n);
    let mut carry = initial_carry;
    for i in 0..n {
        let (b1, b2) = (s1.bit(i), s2.bit(i));
        let bit = match (b1, b2) {
            (false, false) => false,
            (true, true) => true,
            _ => {
                let emitted = carry;
                carry = !carry;
                emitted
            }
        };
        out.set_bit(i, bit);
        trace.push(StepTrace {
            step: i,
            inputs: vec![b1 as u8, b2 as u8],
            carry: carry as i64,
            output: bit as u8,
        });
    }
    Ok((out, trace))
}

/// Carry machine for the generalized i-input constant-length adder. The
/// carry starts at i/2 (so the fan-in must be even), accumulates the slot
/// sum, and emits a 1 whenever it exceeds i. Carry stays in [0, i], which
/// pins the final value within 0.5/n of the scaled sum.
#[derive(Clone, Debug)]
pub struct ScsaState {
    fan_in: u64,
    carry: u64,
    ones_emitted: u64,
    inputs_consumed: u64,
}

impl ScsaState {
    pub fn new(fan_in: usize) -> Result<Self> {
        if fan_in < 2 || !fan_in.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "constant-length adder fan-in must be even and >= 2 (carry starts at \
                 fan_in/2), got {fan_in}"
            )));
        }
        Ok(Self {
            fan_in: fan_in as u64,
            carry: fan_in as u64 / 2,
            ones_emitted: 0,
            inputs_consumed: 0,
        })
    }

    pub fn carry(&self) -> u64 {
        self.carry
    }

    /// Feeds one slot; `ones_in_slot` is how many of the i inputs are 1.
    pub fn step(&mut self, ones_in_slot: usize) -> bool {
        assert!(ones_in_slot as u64 <= self.fan_in);
        self.carry += ones_in_slot as u64;
        self.inputs_consumed += ones_in_slot as u64;
        let emit = self.carry > self.fan_in;
        if emit {
            self.ones_emitted += 1;
            self.carry -= self.fan_in;
        }
        debug_assert!(self.carry <= self.fan_in);
        debug_assert_eq!(
            (self.fan_in * self.ones_emitted) as i64 + self.carry as i64
                - (self.fan_in / 2) as i64,
            self.inputs_consumed as i64,
            "carry conservation broken"
        );
        emit
    }
}

/// Generalized constant-length adder over an even number of equal-length
/// streams. Output value is within 0.5/n of (sum of k_j)/(i*n).
pub fn scsa_add_n(inputs: &[BitStream]) -> Result<BitStream> {
    if inputs.len() < 2 {
        return Err(Error::EmptyInput("scsa_add_n needs at least two streams"));
    }
    let n = inputs[0].len();
    for s in inputs {
        require_equal(&inputs[0], s)?;
    }
    let mut state = ScsaState::new(inputs.len())?;
    let mut out = BitStream::zeros(n);
    for t in 0..n {
        let ones = inputs.iter().filter(|s| s.bit(t)).count();
        out.set_bit(t, state.step(ones));
    }
    Ok(out)
}

/// Register regeneration for the constant-length multiplier. Counts are
/// replayed as: input 1 canonically (k1 ones first), input 2 through a
/// carry walk that spreads k2 ones across the window. Fresh carry per
/// window; n must be even because the emit threshold is n/2.
pub fn scsm_regenerate(v1: StreamValue, v2: StreamValue) -> Result<(BitStream, BitStream)> {
    if v1.len() != v2.len() {
        return Err(Error::LengthMismatch {
            left: v1.len() as usize,
            right: v2.len() as usize,
        });
    }
    let n = v1.len() as usize;
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::UnsupportedLength {
            unit: "scsm",
            n,
            reason: "the regeneration threshold is n/2, so n must be even (>= 2)",
        });
    }
    let reg1 = canonical_stream(v1);
    let mut state = ScsmState::new(v2.ones(), n);
    let mut reg2 = BitStream::zeros(n);
    for i in 0..n {
        reg2.set_bit(i, state.step());
    }
    Ok((reg1, reg2))
}

/// Carry walk that regenerates a count k over an n-slot window: each slot
/// adds k to the carry and emits a 1 (subtracting n) once the carry reaches
/// n/2. Carry stays in [-n/2, n/2), and over the full window exactly k ones
/// come out.
#[derive(Clone, Debug)]
pub struct ScsmState {
    k: u64,
    n: usize,
    carry: i64,
    steps: usize,
    ones_emitted: u64,
}

impl ScsmState {
    pub fn new(k: u64, n: usize) -> Self {
        Self {
            k,
            n,
            carry: 0,
            steps: 0,
            ones_emitted: 0,
        }
    }

    pub fn carry(&self) -> i64 {
        self.carry
    }

    pub fn step(&mut self) -> bool {
        let n = self.n as i64;
        self.carry += self.k as i64;
        self.steps += 1;
        let emit = self.carry >= n / 2;
        if emit {
            self.ones_emitted += 1;
            self.carry -= n;
        }
        debug_assert!(self.carry >= -n / 2 && self.carry < n / 2);
        debug_assert_eq!(
            n * self.ones_emitted as i64 + self.carry,
            self.steps as i64 * self.k as i64,
            "regeneration conservation broken"
        );
        emit
    }
}

/// Constant-length multiplier: count both operands, regenerate, AND the
/// replays. The AND sees the k1-slot prefix of the spread-out k2 replay, so
/// the output value is within 0.5/n of k1*k2/(n*n).
pub fn scsm_multiply(s1: &BitStream, s2: &BitStream) -> Result<BitStream> {
    require_equal(s1, s2)?;
    let (reg1, reg2) = scsm_regenerate(s1.value(), s2.value())?;
    reg1.and(&reg2)
}

pub fn scsm_multiply_traced(
    s1: &BitStream,
    s2: &BitStream,
) -> Result<(BitStream, Vec<StepTrace>)> {
    let n = require_equal(s1, s2)?;
    let (reg1, reg2) = scsm_regenerate(s1.value(), s2.value())?;
    let out = reg1.and(&reg2)?;
    let mut state = ScsmState::new(s2.count_ones(), n);
    let trace = (0..n)
        .map(|i| {
            state.step();
            StepTrace {
                step: i,
                inputs: vec![reg1.bit(i) as u8, reg2.bit(i) as u8],
                carry: state.carry(),
                output: out.bit(i) as u8,
            }
        })
        .collect();
    Ok((out, trace))
}

/// Serializes a step trace as JSON lines, one slot per line.
pub fn trace_to_json_lines(trace: &[StepTrace]) -> String {
    trace
        .iter()
        .map(|t| serde_json::to_string(t).expect("trace serialization cannot fail"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_stream(ones: usize, len: usize, rng: &mut ChaCha8Rng) -> BitStream {
        let mut bits: Vec<bool> = (0..len).map(|i| i < ones).collect();
        bits.shuffle(rng);
        BitStream::from_bools(&bits)
    }

    fn sv(k: u64, n: u64) -> StreamValue {
        StreamValue::new(k, n).unwrap()
    }

    #[test]
    fn sisa_known_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s1 = random_stream(5, 8, &mut rng);
        let s2 = random_stream(3, 8, &mut rng);
        let out = sisa_add(&s1, &s2).unwrap();
        assert_eq!(out.value(), sv(8, 16));
    }

    #[test]
    fn sisa_expansion_layout_matches_select_table() {
        // n=8: expansion slots are [R0|R3, R3, R1|R3 x2, R2|R3 x4].
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k1 in 0..=8usize {
            let s1 = random_stream(k1, 8, &mut rng);
            let s2 = BitStream::zeros(8);
            let out = sisa_add(&s1, &s2).unwrap();
            let (r0, r1, r2, r3) = (k1 & 1 == 1, k1 >> 1 & 1 == 1, k1 >> 2 & 1 == 1, k1 == 8);
            let mut expect = vec![r0 || r3, r3];
            expect.extend([r1 || r3; 2]);
            expect.extend([r2 || r3; 4]);
            let got: Vec<bool> = (8..16).map(|i| out.bit(i)).collect();
            assert_eq!(got, expect, "k1={k1}");
        }
    }

    #[test]
    fn sisa_passes_second_operand_through_first_window() {
        let s1: BitStream = "0110".parse().unwrap();
        let s2: BitStream = "1001".parse().unwrap();
        let out = sisa_add(&s1, &s2).unwrap();
        assert_eq!(&out.to_string()[..4], "1001");
    }

    #[test]
    fn sisa_exact_for_all_counts_and_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in [2usize, 4, 8, 16] {
            for k1 in 0..=n {
                for k2 in 0..=n {
                    for _ in 0..4 {
                        let s1 = random_stream(k1, n, &mut rng);
                        let s2 = random_stream(k2, n, &mut rng);
                        let out = sisa_add(&s1, &s2).unwrap();
                        assert_eq!(out.value(), sv((k1 + k2) as u64, 2 * n as u64));
                    }
                }
            }
        }
    }

    #[test]
    fn sisa_full_scale_renders_all_ones() {
        let s1 = BitStream::all_ones(8);
        let s2 = BitStream::zeros(8);
        let out = sisa_add(&s1, &s2).unwrap();
        assert_eq!(out.to_string(), "0000000011111111");
    }

    #[test]
    fn sisa_rejects_non_power_of_two() {
        for n in [1usize, 3, 6, 7, 12] {
            let s = BitStream::zeros(n);
            assert!(sisa_add(&s, &s).is_err(), "n={n} should be unsupported");
        }
    }

    #[test]
    fn sism_three_quarters_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s1 = random_stream(3, 4, &mut rng);
        let s2 = random_stream(3, 4, &mut rng);
        let out = sism_multiply(&s1, &s2).unwrap();
        assert_eq!(out.value(), sv(9, 16));
    }

    #[test]
    fn sism_slot_formula() {
        // slot t = u1[t mod n] AND u2[t div n] over canonical replays
        let s1: BitStream = "0101".parse().unwrap();
        let s2: BitStream = "1110".parse().unwrap();
        let out = sism_multiply(&s1, &s2).unwrap();
        let u1 = canonical_stream(s1.value());
        let u2 = canonical_stream(s2.value());
        for t in 0..16 {
            assert_eq!(out.bit(t), u1.bit(t % 4) && u2.bit(t / 4));
        }
    }

    #[test]
    fn sism_exact_for_all_counts_and_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for n in [2usize, 4, 8, 16] {
            for k1 in 0..=n {
                for k2 in 0..=n {
                    for _ in 0..4 {
                        let s1 = random_stream(k1, n, &mut rng);
                        let s2 = random_stream(k2, n, &mut rng);
                        let out = sism_multiply(&s1, &s2).unwrap();
                        assert_eq!(out.value(), sv((k1 * k2) as u64, (n * n) as u64));
                    }
                }
            }
        }
    }

    #[test]
    fn sism_select_speeds_differ_by_n() {
        // Structural check on the slot formula at n=4: the input-1 select
        // index completes 4 full cycles while the input-2 select holds each
        // value for 4 slots and completes one.
        let n = 4;
        let fast: Vec<usize> = (0..n * n).map(|t| t % n).collect();
        let slow: Vec<usize> = (0..n * n).map(|t| t / n).collect();
        let fast_cycles = fast.windows(2).filter(|w| w[1] < w[0]).count() + 1;
        assert_eq!(fast_cycles, 4);
        assert!(slow.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1));
        assert_eq!(slow.iter().filter(|&&v| v == 0).count(), 4);
    }

    #[test]
    fn scsa2_table_behaviour() {
        // (0,0) keeps carry, emits 0; (1,1) keeps carry, emits 1; a mismatch
        // emits the carry and flips it.
        let cases = [
            ("00", "00", true, "00", true),
            ("11", "11", true, "11", true),
            ("10", "01", true, "10", true),
            ("10", "01", false, "01", false),
        ];
        for (a, b, init, want, want_carry) in cases {
            let s1: BitStream = a.parse().unwrap();
            let s2: BitStream = b.parse().unwrap();
            let (out, trace) = scsa_add2_traced(&s1, &s2, init).unwrap();
            assert_eq!(out.to_string(), want, "{a}+{b} init={init}");
            assert_eq!(trace.last().unwrap().carry == 1, want_carry);
        }
    }

    #[test]
    fn scsa2_rounds_odd_sums_up_with_initial_carry_set() {
        // 3/4 + 2/4: ideal 5/8 sits between 2/4 and 3/4; initial carry 1
        // makes the first mismatch emit 1, so the result is 3/4.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let s1 = random_stream(3, 4, &mut rng);
            let s2 = random_stream(2, 4, &mut rng);
            let out = scsa_add2(&s1, &s2, true).unwrap();
            assert_eq!(out.value(), sv(3, 4));
        }
    }

    #[test]
    fn scsa2_parity_exactness_and_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for n in [2usize, 4, 8, 16] {
            for k1 in 0..=n {
                for k2 in 0..=n {
                    for _ in 0..4 {
                        let s1 = random_stream(k1, n, &mut rng);
                        let s2 = random_stream(k2, n, &mut rng);
                        let out = scsa_add2(&s1, &s2, true).unwrap();
                        let o = out.count_ones() as i64;
                        let diff = 2 * o - (k1 + k2) as i64;
                        if (k1 + k2) % 2 == 0 {
                            assert_eq!(diff, 0, "even parity must be exact");
                        } else {
                            assert_eq!(diff.abs(), 1, "odd parity must miss by half a one");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn scsa_state_validates_fan_in() {
        assert!(ScsaState::new(1).is_err());
        assert!(ScsaState::new(3).is_err());
        assert!(ScsaState::new(2).is_ok());
        assert!(ScsaState::new(4).is_ok());
    }

    #[test]
    fn scsa_add_n_bound_exhaustive_on_canonical_streams() {
        // i=4, n=8: every (k1,k2,k3,k4) combination; the output count must be
        // the scaled sum rounded to a neighbouring integer.
        let n = 8u64;
        for k1 in 0..=n {
            for k2 in 0..=n {
                for k3 in 0..=n {
                    for k4 in 0..=n {
                        let inputs: Vec<BitStream> = [k1, k2, k3, k4]
                            .iter()
                            .map(|&k| canonical_stream(sv(k, n)))
                            .collect();
                        let out = scsa_add_n(&inputs).unwrap();
                        let o = out.count_ones();
                        let total = k1 + k2 + k3 + k4;
                        // |o/n - total/(4n)| <= 1/(2n)  <=>  |4o - total| <= 2
                        assert!(
                            (4 * o as i64 - total as i64).abs() <= 2,
                            "k={k1},{k2},{k3},{k4}: got {o} ones"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn scsa_add_n_bound_random_orderings() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..500 {
            let n = 8usize;
            let inputs: Vec<BitStream> = (0..4)
                .map(|_| {
                    let k = rand::Rng::gen_range(&mut rng, 0..=n);
                    random_stream(k, n, &mut rng)
                })
                .collect();
            let total: u64 = inputs.iter().map(|s| s.count_ones()).sum();
            let o = scsa_add_n(&inputs).unwrap().count_ones();
            assert!((4 * o as i64 - total as i64).abs() <= 2);
        }
    }

    #[test]
    fn scsa_add_n_rejects_odd_fan_in_and_mismatch() {
        let s = BitStream::zeros(8);
        assert!(scsa_add_n(std::slice::from_ref(&s)).is_err());
        assert!(scsa_add_n(&[s.clone(), s.clone(), s.clone()]).is_err());
        let short = BitStream::zeros(4);
        assert!(scsa_add_n(&[s.clone(), short]).is_err());
    }

    #[test]
    fn scsm_regeneration_spreads_ones() {
        // k2 = 3 over n = 8: carry walk 3,-2,1,-4,-1,2,-3,0 emits slots 2,4,7.
        let (_, reg2) = scsm_regenerate(sv(8, 8), sv(3, 8)).unwrap();
        assert_eq!(reg2.to_string(), "01010010");
        let mut state = ScsmState::new(3, 8);
        let carries: Vec<i64> = (0..8)
            .map(|_| {
                state.step();
                state.carry()
            })
            .collect();
        assert_eq!(carries, vec![3, -2, 1, -4, -1, 2, -3, 0]);
    }

    #[test]
    fn scsm_regeneration_emits_exactly_k_ones() {
        for n in [2u64, 4, 6, 8, 10, 16, 32] {
            for k in 0..=n {
                let (reg1, reg2) = scsm_regenerate(sv(n, n), sv(k, n)).unwrap();
                assert_eq!(reg1.count_ones(), n);
                assert_eq!(reg2.count_ones(), k, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn scsm_known_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        // 3/8 * 7/8 = 21/64 rounds to 3/8 at output resolution 1/8.
        let s1 = random_stream(3, 8, &mut rng);
        let s2 = random_stream(7, 8, &mut rng);
        assert_eq!(scsm_multiply(&s1, &s2).unwrap().value(), sv(3, 8));
        // 2/4 * 3/4 = 6/16 rounds to 2/4.
        let s1 = random_stream(2, 4, &mut rng);
        let s2 = random_stream(3, 4, &mut rng);
        assert_eq!(scsm_multiply(&s1, &s2).unwrap().value(), sv(2, 4));
    }

    #[test]
    fn scsm_bound_exhaustive_and_order_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for n in [2usize, 4, 8, 16] {
            for k1 in 0..=n {
                for k2 in 0..=n {
                    let canon = scsm_multiply(
                        &canonical_stream(sv(k1 as u64, n as u64)),
                        &canonical_stream(sv(k2 as u64, n as u64)),
                    )
                    .unwrap();
                    let o = canon.count_ones();
                    // |o/n - k1 k2/n^2| <= 1/(2n)  <=>  |2(o n - k1 k2)| <= n
                    assert!(
                        (2 * (o as i64 * n as i64 - (k1 * k2) as i64)).abs() <= n as i64,
                        "n={n} k1={k1} k2={k2} got {o}"
                    );
                    for _ in 0..4 {
                        let s1 = random_stream(k1, n, &mut rng);
                        let s2 = random_stream(k2, n, &mut rng);
                        assert_eq!(scsm_multiply(&s1, &s2).unwrap().count_ones(), o);
                    }
                }
            }
        }
    }

    #[test]
    fn scsm_rejects_odd_length() {
        let s = BitStream::zeros(7);
        assert!(scsm_multiply(&s, &s).is_err());
        assert!(scsm_regenerate(sv(1, 7), sv(1, 7)).is_err());
        assert!(scsm_regenerate(sv(1, 4), sv(1, 8)).is_err());
    }

    #[test]
    fn traces_serialize_as_json_lines() {
        let s1: BitStream = "10".parse().unwrap();
        let s2: BitStream = "01".parse().unwrap();
        let (_, trace) = scsa_add2_traced(&s1, &s2, true).unwrap();
        let jsonl = trace_to_json_lines(&trace);
        assert_eq!(jsonl.lines().count(), 2);
        assert!(jsonl.lines().all(|l| l.starts_with('{') && l.contains("\"carry\"")));
        let (_, mtrace) = scsm_multiply_traced(&s1, &s2).unwrap();
        assert_eq!(mtrace.len(), 2);
    }
}
