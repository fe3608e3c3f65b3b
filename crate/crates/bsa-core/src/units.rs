//! Uniform unit evaluation and successive (back-to-back stream) processing.
//!
//! `evaluate_unit` is how sweeps and the verification CLI drive any unit
//! through one operation; `ideal_value` is the shared oracle they measure
//! against. `successive_run` feeds a unit batch after batch without pause,
//! which only constant-length units can sustain.

use crate::async_units::{aisa_add, aism_multiply};
use crate::descriptor::{UnitDescriptor, UnitKind};
use crate::error::{Error, Result};
use crate::stochastic::{and_multiply, mux_add};
use crate::stream::{BitStream, StreamValue};
use crate::sync_units::{scsa_add2, scsm_multiply, scsm_regenerate, sisa_add, sism_multiply};

/// Number of input streams a unit consumes per operation.
pub fn unit_arity(kind: UnitKind) -> usize {
    match kind {
        UnitKind::StochMux => 3, // two operands plus the select stream
        _ => 2,
    }
}

/// Runs one operation of the given unit on its input streams. The
/// constant-length adder starts with its carry bit set.
pub fn evaluate_unit(kind: UnitKind, inputs: &[BitStream]) -> Result<BitStream> {
    if inputs.len() != unit_arity(kind) {
        return Err(Error::InvalidArgument(format!(
            "{} takes {} input streams, got {}",
            kind.name(),
            unit_arity(kind),
            inputs.len()
        )));
    }
    match kind {
        UnitKind::Aisa => aisa_add(&inputs[0], &inputs[1]),
        UnitKind::Aism => aism_multiply(&inputs[0], &inputs[1]),
        UnitKind::Sisa => sisa_add(&inputs[0], &inputs[1]),
        UnitKind::Sism => sism_multiply(&inputs[0], &inputs[1]),
        UnitKind::Scsa => scsa_add2(&inputs[0], &inputs[1], true),
        UnitKind::Scsm => scsm_multiply(&inputs[0], &inputs[1]),
        UnitKind::StochAnd => and_multiply(&inputs[0], &inputs[1]),
        UnitKind::StochMux => mux_add(&inputs[0], &inputs[1], &inputs[2]),
    }
}

/// The value an ideal (infinitely precise) unit would produce: the scaled sum
/// for adders, the product for multipliers.
pub fn ideal_value(kind: UnitKind, inputs: &[StreamValue]) -> Result<StreamValue> {
    let operands = match kind {
        UnitKind::StochMux => &inputs[..2],
        _ => inputs,
    };
    if operands.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "ideal_value for {} needs 2 operands, got {}",
            kind.name(),
            operands.len()
        )));
    }
    if kind.is_adder() {
        operands[0].scaled_add(operands[1])
    } else {
        Ok(operands[0].product(operands[1]))
    }
}

/// Worst-case |value - ideal| for a unit at input length n, as an exact
/// rational (numerator, denominator). Zero for fully-accurate units; the
/// constant-length units may miss by half an output slot.
pub fn error_bound(kind: UnitKind, n: usize) -> Option<(u64, u64)> {
    match kind.accuracy() {
        crate::descriptor::Accuracy::FullyAccurate => Some((0, 1)),
        crate::descriptor::Accuracy::SemiAccurate => Some((1, 2 * n as u64)),
        crate::descriptor::Accuracy::Stochastic => None,
    }
}

/// Result of pushing successive batches through a unit.
#[derive(Clone, Debug)]
pub enum SuccessiveRun {
    Completed {
        /// Output value of each batch's n-slot output window.
        per_batch: Vec<StreamValue>,
        /// Value of the whole concatenated output stream.
        combined: StreamValue,
    },
    /// The unit cannot keep up with back-to-back inputs (output longer than
    /// input), so the run is refused rather than simulated wrongly.
    Unsupported { unit: UnitKind, reason: String },
}

/// Feeds equal-length batches back to back. Constant-length units process the
/// concatenation in stride: the adder's carry bit survives across batch
/// boundaries (nothing resets it on a wire), while the multiplier recounts
/// and regenerates each window, as its counters are cleared per window.
/// In strict mode an increasing-length unit is an error instead of a report.
pub fn successive_run(
    desc: &UnitDescriptor,
    batches: &[Vec<BitStream>],
    strict: bool,
) -> Result<SuccessiveRun> {
    if batches.is_empty() {
        return Err(Error::EmptyInput("successive_run needs at least one batch"));
    }
    if !desc.successive_capable {
        if strict {
            return Err(Error::SuccessiveUnsupported {
                unit: desc.kind.name(),
                m: desc.output_len,
                n: desc.input_len,
            });
        }
        return Ok(SuccessiveRun::Unsupported {
            unit: desc.kind,
            reason: format!(
                "{} emits {} bits per {}-bit input and would fall behind the next batch",
                desc.kind.name(),
                desc.output_len,
                desc.input_len
            ),
        });
    }
    let n = desc.input_len;
    let arity = unit_arity(desc.kind);
    for batch in batches {
        if batch.len() != arity {
            return Err(Error::InvalidArgument(format!(
                "{} takes {arity} input streams per batch, got {}",
                desc.kind.name(),
                batch.len()
            )));
        }
        for s in batch {
            if s.len() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: s.len(),
                });
            }
        }
    }

    let outputs: Vec<BitStream> = match desc.kind {
        UnitKind::Scsa => {
            // One continuous carry machine over all batches.
            let mut carry = true;
            let mut outs = Vec::with_capacity(batches.len());
            for batch in batches {
                let mut out = BitStream::zeros(n);
                for t in 0..n {
                    let (b1, b2) = (batch[0].bit(t), batch[1].bit(t));
                    let bit = match (b1, b2) {
                        (false, false) => false,
                        (true, true) => true,
                        _ => {
                            let emitted = carry;
                            carry = !carry;
                            emitted
                        }
                    };
                    out.set_bit(t, bit);
                }
                outs.push(out);
            }
            outs
        }
        UnitKind::Scsm => {
            // Counters and the regeneration carry are cleared per window.
            batches
                .iter()
                .map(|b| {
                    let (r1, r2) = scsm_regenerate(b[0].value(), b[1].value())?;
                    r1.and(&r2)
                })
                .collect::<Result<_>>()?
        }
        // The stochastic units are memoryless, so batches are independent.
        UnitKind::StochAnd | UnitKind::StochMux => batches
            .iter()
            .map(|b| evaluate_unit(desc.kind, b))
            .collect::<Result<_>>()?,
        other => {
            unreachable!("{} cannot be successive-capable", other.name())
        }
    };

    let combined = crate::stream::concat_runs(&outputs)?.value();
    Ok(SuccessiveRun::Completed {
        per_batch: outputs.iter().map(|o| o.value()).collect(),
        combined,
    })
}
