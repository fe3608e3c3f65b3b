//! Unit descriptors: what a unit is, what lengths it consumes and emits, and
//! whether it can chew through back-to-back input streams.
//!
//! The length contract is forced by counting, not by circuit detail. A
//! fully-accurate adder of two n-bit streams may have to represent (k1+k2)/2n,
//! so it needs 2n output slots; a fully-accurate multiplier needs n*n slots
//! for k1*k2/n*n. Only units whose output length equals their input length can
//! process successive streams without falling behind.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported per-unit input length. A multiplier at this resolution
/// would already emit a 4-gigabit stream; experiments stay far below it.
pub const MAX_UNIT_INPUT_LEN: usize = 65_536;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    /// Asynchronous increasing-stream-length adder (delay + OR).
    Aisa,
    /// Asynchronous increasing-stream-length multiplier (delay schedule + ANDs).
    Aism,
    /// Synchronous increasing-stream-length adder (counter, register, mux).
    Sisa,
    /// Synchronous increasing-stream-length multiplier (regenerate + select).
    Sism,
    /// Synchronous constant-stream-length adder (carry machine).
    Scsa,
    /// Synchronous constant-stream-length multiplier (regenerate + AND).
    Scsm,
    /// Stochastic AND multiplier baseline.
    StochAnd,
    /// Stochastic mux scaled-adder baseline.
    StochMux,
}

impl UnitKind {
    pub const ALL: [UnitKind; 8] = [
        UnitKind::Aisa,
        UnitKind::Aism,
        UnitKind::Sisa,
        UnitKind::Sism,
        UnitKind::Scsa,
        UnitKind::Scsm,
        UnitKind::StochAnd,
        UnitKind::StochMux,
    ];

    /// The six deterministic units, i.e. everything with a hard error bound.
    pub const DETERMINISTIC: [UnitKind; 6] = [
        UnitKind::Aisa,
        UnitKind::Aism,
        UnitKind::Sisa,
        UnitKind::Sism,
        UnitKind::Scsa,
        UnitKind::Scsm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            UnitKind::Aisa => "aisa",
            UnitKind::Aism => "aism",
            UnitKind::Sisa => "sisa",
            UnitKind::Sism => "sism",
            UnitKind::Scsa => "scsa",
            UnitKind::Scsm => "scsm",
            UnitKind::StochAnd => "stoch-and",
            UnitKind::StochMux => "stoch-mux",
        }
    }

    pub fn parse(name: &str) -> Result<UnitKind> {
        UnitKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| {
                let valid: Vec<_> = UnitKind::ALL.iter().map(|k| k.name()).collect();
                Error::Parse(format!(
                    "unknown unit {name:?}; valid units: {}",
                    valid.join(", ")
                ))
            })
    }

    pub fn is_adder(&self) -> bool {
        matches!(
            self,
            UnitKind::Aisa | UnitKind::Sisa | UnitKind::Scsa | UnitKind::StochMux
        )
    }

    pub fn accuracy(&self) -> Accuracy {
        match self {
            UnitKind::Aisa | UnitKind::Aism | UnitKind::Sisa | UnitKind::Sism => {
                Accuracy::FullyAccurate
            }
            UnitKind::Scsa | UnitKind::Scsm => Accuracy::SemiAccurate,
            UnitKind::StochAnd | UnitKind::StochMux => Accuracy::Stochastic,
        }
    }

    /// Output length for input length n under the canonical construction.
    pub fn output_len(&self, n: usize) -> usize {
        match self {
            UnitKind::Aisa | UnitKind::Sisa => 2 * n,
            UnitKind::Aism | UnitKind::Sism => n * n,
            UnitKind::Scsa | UnitKind::Scsm | UnitKind::StochAnd | UnitKind::StochMux => n,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accuracy {
    /// Output value is exactly the ideal result.
    FullyAccurate,
    /// Output value is within 0.5/n of the ideal result, deterministically.
    SemiAccurate,
    /// Output value is a random variable around the ideal result.
    Stochastic,
}

/// Static description of a unit instance at one input resolution.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct UnitDescriptor {
    pub kind: UnitKind,
    pub input_len: usize,
    pub output_len: usize,
    pub accuracy: Accuracy,
    /// True iff output_len == input_len, the condition for consuming
    /// back-to-back streams at line rate.
    pub successive_capable: bool,
}

impl UnitDescriptor {
    /// Canonical descriptor for a unit kind at input length n.
    pub fn new(kind: UnitKind, n: usize) -> Result<Self> {
        Self::custom(kind, n, kind.output_len(n), kind.accuracy())
    }

    /// Descriptor with explicit lengths, checked against the counting bounds:
    /// a fully-accurate adder needs at least 2n output slots and a
    /// fully-accurate multiplier at least n*n.
    pub fn custom(kind: UnitKind, n: usize, m: usize, accuracy: Accuracy) -> Result<Self> {
        if n == 0 || n > MAX_UNIT_INPUT_LEN {
            return Err(Error::UnsupportedLength {
                unit: kind.name(),
                n,
                reason: "input length must be in 1..=65536",
            });
        }
        if accuracy == Accuracy::FullyAccurate {
            if kind.is_adder() && m < 2 * n {
                return Err(Error::InvalidArgument(format!(
                    "fully accurate adder needs at least 2n = {} output slots, got {m}: \
                     (k1+k2)/2n has 2n+1 possible values",
                    2 * n
                )));
            }
            if !kind.is_adder() && m < n * n {
                return Err(Error::InvalidArgument(format!(
                    "fully accurate multiplier needs at least n*n = {} output slots, got {m}: \
                     k1*k2/n*n has n*n+1 possible values",
                    n * n
                )));
            }
        }
        Ok(Self {
            kind,
            input_len: n,
            output_len: m,
            accuracy,
            successive_capable: m == n,
        })
    }
}
