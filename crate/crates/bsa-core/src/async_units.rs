//! Asynchronous increasing-stream-length units: an adder that separates its
//! operands in time and ORs them, and a multiplier that uses per-gate delay
//! lines to give every input bit pair its own output slot.
//!
//! The multiplier is implemented twice on purpose: once by enumerating the
//! n x n bit pairs diagonal by diagonal, and once by simulating the delay
//! schedule slot by slot. The two routes must agree bit for bit; tests hold
//! them to that.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::BitStream;

/// Delayed-OR adder. Slot t carries s1[t] for t < n and s2[t-n] afterwards,
/// so the 2n-slot output has value (k1+k2)/2n exactly.
pub fn aisa_add(s1: &BitStream, s2: &BitStream) -> Result<BitStream> {
    let n = s1.len();
    if n != s2.len() {
        return Err(Error::LengthMismatch {
            left: n,
            right: s2.len(),
        });
    }
    let mut out = BitStream::zeros(2 * n);
    out.copy_range(0, s1, 0, n);
    out.copy_range(n, s2, 0, n);
    Ok(out)
}

/// Incremental delays feeding one AND gate of the multiplier.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct GateDelay {
    /// 1-based gate index, matching the construction order.
    pub gate: usize,
    /// Extra input-1 delay of this gate relative to the previous gate.
    pub input1_delta: i64,
    /// Extra input-2 delay of this gate relative to the previous gate.
    pub input2_delta: i64,
}

/// The multiplier's 2n-1 gates with their incremental delays. Cumulative
/// delays are what the simulation uses; they are all nonnegative even though
/// one input-2 increment is negative.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct DelaySchedule {
    pub n: usize,
    pub gates: Vec<GateDelay>,
}

impl DelaySchedule {
    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn input1_total(&self) -> i64 {
        self.gates.iter().map(|g| g.input1_delta).sum()
    }

    pub fn input2_total(&self) -> i64 {
        self.gates.iter().map(|g| g.input2_delta).sum()
    }

    /// Per-gate absolute delays for both inputs.
    pub fn cumulative(&self) -> (Vec<usize>, Vec<usize>) {
        let mut d1 = Vec::with_capacity(self.gates.len());
        let mut d2 = Vec::with_capacity(self.gates.len());
        let (mut a, mut b) = (0i64, 0i64);
        for g in &self.gates {
            a += g.input1_delta;
            b += g.input2_delta;
            debug_assert!(a >= 0 && b >= 0, "cumulative delay went negative");
            d1.push(a as usize);
            d2.push(b as usize);
        }
        (d1, d2)
    }
}

/// Delay schedule for an n x n multiplier, n >= 2. Gate 1 sees both inputs
/// undelayed; gates 2..=n walk the lower diagonals, gate n+1 jumps to the far
/// corner, and the rest walk back up the upper diagonals.
pub fn aism_schedule(n: usize) -> Result<DelaySchedule> {
    if n < 2 {
        return Err(Error::UnsupportedLength {
            unit: "aism",
            n,
            reason: "the delay schedule needs at least 2 gates per input",
        });
    }
    let n_i = n as i64;
    let gates = (1..=2 * n - 1)
        .map(|i| {
            let i_i = i as i64;
            let (d1, d2) = if i == 1 {
                (0, 0)
            } else if i <= n {
                (n_i - (i_i - 1), n_i - (i_i - 2))
            } else if i == n + 1 {
                (n_i, -(n_i - 2))
            } else {
                (i_i - (n_i + 1), i_i - n_i)
            };
            GateDelay {
                gate: i,
                input1_delta: d1,
                input2_delta: d2,
            }
        })
        .collect();
    Ok(DelaySchedule { n, gates })
}

/// Maps each output slot to the (input-1, input-2) bit pair it carries,
/// derived from the schedule. Errors if two gates collide on a slot or any
/// slot of the n*n output is left uncovered, so it doubles as the coverage
/// check.
pub fn aism_slot_map(n: usize) -> Result<Vec<(usize, usize)>> {
    let schedule = aism_schedule(n)?;
    let (d1, d2) = schedule.cumulative();
    let mut map: Vec<Option<(usize, usize)>> = vec![None; n * n];
    for g in 0..schedule.gate_count() {
        // slot t = a + D1 = b + D2, so the gate pairs bits with b = a + offset
        let offset = d1[g] as i64 - d2[g] as i64;
        let a_min = 0.max(-offset) as usize;
        let a_max = (n as i64 - 1).min(n as i64 - 1 - offset) as usize;
        for a in a_min..=a_max {
            let b = (a as i64 + offset) as usize;
            let t = a + d1[g];
            if t >= n * n {
                return Err(Error::InvalidArgument(format!(
                    "gate {} emits past the n*n output window at slot {t}",
                    g + 1
                )));
            }
            if let Some(prev) = map[t] {
                return Err(Error::InvalidArgument(format!(
                    "slot {t} driven by both {prev:?} and {:?}",
                    (a, b)
                )));
            }
            map[t] = Some((a, b));
        }
    }
    map.into_iter()
        .enumerate()
        .map(|(t, m)| m.ok_or_else(|| Error::InvalidArgument(format!("slot {t} never driven"))))
        .collect()
}

fn require_equal_nonzero(s1: &BitStream, s2: &BitStream) -> Result<usize> {
    let n = s1.len();
    if n != s2.len() {
        return Err(Error::LengthMismatch {
            left: n,
            right: s2.len(),
        });
    }
    Ok(n)
}

/// ANDs an aligned window of two streams into `out` at `dst`, chunkwise.
fn and_window(out: &mut BitStream, dst: usize, s1: &BitStream, a0: usize, s2: &BitStream, b0: usize, len: usize) {
    let mut done = 0;
    while done < len {
        let chunk = (len - done).min(64);
        let v = s1.extract_word(a0 + done, chunk) & s2.extract_word(b0 + done, chunk);
        out.or_word(dst + done, chunk, v);
        done += chunk;
    }
}

/// Delay-line multiplier, diagonal-enumeration route. Walks the bit-pair
/// diagonals in gate order and writes each pair's AND into the next slot:
/// first (a, a), then (a, a-1) down to (a, a-(n-1)), then (0, n-1), then
/// (a, a+o) for o = n-2 down to 1. Output has n*n slots and value
/// k1*k2/(n*n) exactly.
pub fn aism_multiply(s1: &BitStream, s2: &BitStream) -> Result<BitStream> {
    let n = require_equal_nonzero(s1, s2)?;
    if n == 1 {
        return s1.and(s2);
    }
    let mut out = BitStream::zeros(n * n);
    let mut cursor = 0;
    for g in 1..=n {
        // diagonal b = a - (g-1), valid for a in [g-1, n)
        let len = n - (g - 1);
        and_window(&mut out, cursor, s1, g - 1, s2, 0, len);
        cursor += len;
    }
    and_window(&mut out, cursor, s1, 0, s2, n - 1, 1);
    cursor += 1;
    for g in n + 2..=2 * n - 1 {
        // diagonal b = a + o for o = 2n - g, valid for a in [0, n-o)
        let o = 2 * n - g;
        let len = n - o;
        and_window(&mut out, cursor, s1, 0, s2, o, len);
        cursor += len;
    }
    debug_assert_eq!(cursor, n * n);
    Ok(out)
}

/// Delay-line multiplier, schedule-simulation route. Each gate ANDs the two
/// raw streams shifted by its cumulative delays, and the gate outputs are
/// ORed per slot, exactly as the delay blocks would drive them on a wire.
pub fn aism_multiply_scheduled(s1: &BitStream, s2: &BitStream) -> Result<BitStream> {
    let n = require_equal_nonzero(s1, s2)?;
    if n == 1 {
        return s1.and(s2);
    }
    let schedule = aism_schedule(n)?;
    let (d1, d2) = schedule.cumulative();
    let mut out = BitStream::zeros(n * n);
    for g in 0..schedule.gate_count() {
        // gate output is nonzero only where both shifted streams are live
        let start = d1[g].max(d2[g]);
        let end = (d1[g] + n).min(d2[g] + n);
        and_window(&mut out, start, s1, start - d1[g], s2, start - d2[g], end - start);
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AsyncUnit {
    Adder,
    Multiplier,
}

/// Inverter spend for the delay lines of one unit. Inverters come in pairs
/// (a chain must not invert), so every block gets the smallest even count
/// that meets its delay, and the total must exceed the number of output
/// slots that outlive the input window.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct InverterBudget {
    /// Output slots beyond the input window: m - n.
    pub required_outputs: u64,
    /// Total inverters across all delay blocks; always even.
    pub inverter_count: u64,
    /// Even inverter count per delay block.
    pub per_block: Vec<u64>,
}

fn ceil_even(d: u64) -> u64 {
    d + (d & 1)
}

pub fn inverter_budget(unit: AsyncUnit, n: usize) -> Result<InverterBudget> {
    match unit {
        AsyncUnit::Adder => {
            if n == 0 {
                return Err(Error::UnsupportedLength {
                    unit: "aisa",
                    n,
                    reason: "input length must be >= 1",
                });
            }
            // One block delaying input 2 by n: the count must be even and
            // strictly beat the n outputs that arrive after the inputs end.
            let count = if n % 2 == 1 { n as u64 + 1 } else { n as u64 + 2 };
            Ok(InverterBudget {
                required_outputs: n as u64,
                inverter_count: count,
                per_block: vec![count],
            })
        }
        AsyncUnit::Multiplier => {
            let schedule = aism_schedule(n)?;
            let per_block: Vec<u64> = schedule
                .gates
                .iter()
                .flat_map(|g| [g.input1_delta, g.input2_delta])
                .filter(|&d| d != 0)
                .map(|d| ceil_even(d.unsigned_abs()))
                .collect();
            Ok(InverterBudget {
                required_outputs: (n * n - n) as u64,
                inverter_count: per_block.iter().sum(),
                per_block,
            })
        }
    }
}
