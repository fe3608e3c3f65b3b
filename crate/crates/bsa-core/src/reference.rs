//! Deliberately literal reference models, kept separate from the production
//! code paths so the two can be checked against each other. Nothing here is
//! optimized and nothing here should ever be called outside verification.

use crate::error::{Error, Result};
use crate::stream::BitStream;

/// Line-by-line transcription of the constant-length multiplier's register
/// regeneration procedure, with 1-based indexing and explicit branches kept
/// exactly as written. Returns (RegIn1, RegIn2) as 0/1 vectors.
///
/// The production path is [`crate::sync_units::scsm_regenerate`]; tests and
/// the acceptance suite require bit-for-bit agreement between the two.
#[allow(clippy::assign_op_pattern)]
pub fn algorithm1_regenerate(in1: &BitStream, in2: &BitStream) -> Result<(Vec<u8>, Vec<u8>)> {
    if in1.len() != in2.len() {
        return Err(Error::LengthMismatch {
            left: in1.len(),
            right: in2.len(),
        });
    }
    let n = in1.len();
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::UnsupportedLength {
            unit: "scsm-reference",
            n,
            reason: "the regeneration threshold is n/2, so n must be even (>= 2)",
        });
    }

    let mut sum_in1: i64 = 0;
    for i in 0..n {
        sum_in1 += in1.bit(i) as i64;
    }
    let mut sum_in2: i64 = 0;
    for i in 0..n {
        sum_in2 += in2.bit(i) as i64;
    }
    let mut carry: i64 = 0;

    // 1-based registers; index 0 is unused padding.
    let mut reg_in1 = vec![0u8; n + 1];
    let mut reg_in2 = vec![0u8; n + 1];

    let mut i: usize = 1;
    while i <= n {
        if (i as i64) <= sum_in1 {
            reg_in1[i] = 1;
        } else {
            reg_in1[i] = 0;
        }
        carry = carry + sum_in2;
        if carry >= (n as i64) / 2 {
            reg_in2[i] = 1;
            carry = carry - (n as i64);
        } else {
            reg_in2[i] = 0;
        }
        i += 1;
    }

    Ok((reg_in1[1..].to_vec(), reg_in2[1..].to_vec()))
}
