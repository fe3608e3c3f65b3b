//! Pluggable arithmetic for the network's multiply and scaled-add steps.
//!
//! Stream backends do their work by actually generating bit streams and
//! running them through the corresponding units, then reading the output
//! value back; nothing is shortcut through real arithmetic. The float
//! reference is deliberately not a stream backend at all — it is a separate
//! f64 path in the forward pass so the two implementations can be compared
//! against each other.

use bsa_core::stochastic::{and_multiply, lfsr_stream, mix_seed, mux_add, sng, Lfsr};
use bsa_core::{
    aisa_add, aism_multiply, canonical_stream, scsa_add2, scsm_multiply, sisa_add,
    sism_multiply, StreamValue,
};

use crate::error::{Error, Result};

/// Largest n the quadratic-output backends accept: an n-by-n multiplier
/// output at n = 256 is already 65,536 bits per product.
pub const MAX_QUADRATIC_N: u64 = 256;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BackendKind {
    /// f64 forward pass on the same quantized weights; the comparison oracle.
    FloatRef,
    /// Exact rational arithmetic on stream values, no bits materialized.
    Exact,
    /// Asynchronous fully accurate units (delay-routed AND gates).
    Async,
    /// Synchronous increasing-length units (counter, register, selects).
    SyncAccurate,
    /// Synchronous constant-length units (bounded-carry rounding).
    SyncConstant,
    /// LFSR-driven stochastic baseline (AND multiplier, mux adder).
    Stochastic,
}

impl BackendKind {
    pub const ALL: [BackendKind; 6] = [
        BackendKind::FloatRef,
        BackendKind::Exact,
        BackendKind::Async,
        BackendKind::SyncAccurate,
        BackendKind::SyncConstant,
        BackendKind::Stochastic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BackendKind::FloatRef => "float-ref",
            BackendKind::Exact => "exact",
            BackendKind::Async => "async",
            BackendKind::SyncAccurate => "sync-accurate",
            BackendKind::SyncConstant => "sync-constant",
            BackendKind::Stochastic => "stochastic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown backend {s:?}; valid backends: {}",
                    names.join(", ")
                ))
            })
    }

    /// Backends whose multiply and add return the exact scaled result.
    pub fn is_fully_accurate(self) -> bool {
        matches!(
            self,
            BackendKind::Exact | BackendKind::Async | BackendKind::SyncAccurate
        )
    }

    /// Checks that this backend supports resolution n, with the reason when
    /// it does not.
    pub fn check_resolution(self, n: u64) -> Result<()> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "resolution n must be >= 2, got {n}"
            )));
        }
        match self {
            BackendKind::FloatRef | BackendKind::Exact | BackendKind::Stochastic => Ok(()),
            BackendKind::Async => {
                if n > MAX_QUADRATIC_N {
                    return Err(Error::InvalidArgument(format!(
                        "async backend: n = {n} exceeds {MAX_QUADRATIC_N} (n^2-bit products)"
                    )));
                }
                Ok(())
            }
            BackendKind::SyncAccurate => {
                if !n.is_power_of_two() {
                    return Err(Error::InvalidArgument(format!(
                        "sync-accurate backend: the divided-clock select logic needs a \
                         power-of-two n, got {n}"
                    )));
                }
                if n > MAX_QUADRATIC_N {
                    return Err(Error::InvalidArgument(format!(
                        "sync-accurate backend: n = {n} exceeds {MAX_QUADRATIC_N} \
                         (n^2-bit products)"
                    )));
                }
                Ok(())
            }
            BackendKind::SyncConstant => {
                if !n.is_multiple_of(2) {
                    return Err(Error::InvalidArgument(format!(
                        "sync-constant backend: the half-scale carry init needs an even n, \
                         got {n}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Builds a stream backend. `FloatRef` has no stream form; the forward
    /// pass dispatches it to the f64 path instead.
    pub fn instantiate(self, n: u64, seed: u64) -> Result<Box<dyn StreamBackend>> {
        self.check_resolution(n)?;
        Ok(match self {
            BackendKind::FloatRef => {
                return Err(Error::InvalidArgument(
                    "float-ref is not a stream backend; use the float forward path".into(),
                ))
            }
            BackendKind::Exact => Box::new(ExactBackend),
            BackendKind::Async => Box::new(AsyncBackend),
            BackendKind::SyncAccurate => Box::new(SyncAccurateBackend),
            BackendKind::SyncConstant => Box::new(SyncConstantBackend),
            BackendKind::Stochastic => Box::new(StochasticBackend::new(n, seed)?),
        })
    }
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The two operations the forward pass needs. Operands always share a
/// length; implementations may carry generator state (the stochastic
/// backend's LFSRs), hence `&mut self`.
pub trait StreamBackend: Send {
    fn kind(&self) -> BackendKind;

    /// Product of the operand values, at whatever output length the unit
    /// produces.
    fn multiply(&mut self, a: StreamValue, b: StreamValue) -> Result<StreamValue>;

    /// Scaled sum (a + b) / 2 of the operand values.
    fn add_scaled(&mut self, a: StreamValue, b: StreamValue) -> Result<StreamValue>;
}

fn require_same_len(a: StreamValue, b: StreamValue) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "operand lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

struct ExactBackend;

impl StreamBackend for ExactBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Exact
    }

    fn multiply(&mut self, a: StreamValue, b: StreamValue) -> Result<StreamValue> {
        require_same_len(a, b)?;
        Ok(a.product(b))
    }

    fn add_scaled(&mut self, a: StreamValue, b: StreamValue) -> Result<StreamValue> {
        Ok(a.scaled_add(b)?)
    }
}

struct AsyncBackend;

impl StreamBackend for AsyncBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Async
    }

    fn multiply(&mut self, a: StreamValue, b: StreamValue) -> Result<StreamValue> {
        require_same_len(a, b)?;
        let out = aism_multiply(&canonical_stream(a), &canonical_stream(b))?;
        Ok(out.value())
    }

    fn add_scaled(&mut self, a: StreamValue, b: StreamValue) -> Result<StreamValue> {
        let out = aisa_add(&canonical_stream(a), &canonical_stream(b))?;
        Ok(out.value())
    }
}

struct SyncAccurateBackend;

impl StreamBackend for SyncAccurateBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::SyncAccurate
    }

    fn multiply(&mut self, a: StreamValue, b: StreamValue) -> Result<StreamValue> {
        require_same_len(a, b)?;
        let out = sism_multiply(&canonical_stream(a), &canonical_stream(b))?;
        Ok(out.value())
    }

    fn add_scaled(&mut self, a: StreamValue, b: StreamValue) -> Result<StreamValue> {
        let out = sisa_add(&canonical_stream(a), &canonical_stream(b))?;
        Ok(out.value())
    }
}

struct SyncConstantBackend;

impl StreamBackend for SyncConstantBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::SyncConstant
    }

    fn multiply(&mut self, a: StreamValue, b: StreamValue) -> Result<StreamValue> {
        require_same_len(a, b)?;
        let out = scsm_multiply(&canonical_stream(a), &canonical_stream(b))?;
        Ok(out.value())
    }

    fn add_scaled(&mut self, a: StreamValue, b: StreamValue) -> Result<StreamValue> {
        require_same_len(a, b)?;
        let out = scsa_add2(&canonical_stream(a), &canonical_stream(b), true)?;
        Ok(out.value())
    }
}

/// One LFSR feeds every operand regeneration (shifted windows of a maximal
/// sequence are weakly correlated); a second, independently seeded LFSR
/// produces the half-density select streams for the mux adders.
struct StochasticBackend {
    input: Lfsr,
    select: Lfsr,
}

impl StochasticBackend {
    fn new(n: u64, seed: u64) -> Result<Self> {
        let width = Lfsr::width_for_levels(n as usize + 1);
        Ok(Self {
            input: Lfsr::new(width, mix_seed(seed, 1, n))?,
            select: Lfsr::new(width, mix_seed(seed, 2, n))?,
        })
    }

    fn regenerate(&mut self, v: StreamValue) -> Result<bsa_core::BitStream> {
        let scale = self.input.max_value();
        let states = lfsr_stream(&mut self.input, v.len() as usize);
        Ok(sng(v, states, scale)?)
    }
}

impl StreamBackend for StochasticBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Stochastic
    }

    fn multiply(&mut self, a: StreamValue, b: StreamValue) -> Result<StreamValue> {
        require_same_len(a, b)?;
        let sa = self.regenerate(a)?;
        let sb = self.regenerate(b)?;
        Ok(and_multiply(&sa, &sb)?.value())
    }

    fn add_scaled(&mut self, a: StreamValue, b: StreamValue) -> Result<StreamValue> {
        require_same_len(a, b)?;
        let sa = self.regenerate(a)?;
        let sb = self.regenerate(b)?;
        let half = StreamValue::new(a.len() / 2, a.len()).expect("half of len is valid");
        let scale = self.select.max_value();
        let states = lfsr_stream(&mut self.select, a.len() as usize);
        let sel = sng(half, states, scale)?;
        Ok(mux_add(&sa, &sb, &sel)?.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(k: u64, n: u64) -> StreamValue {
        StreamValue::new(k, n).unwrap()
    }

    #[test]
    fn names_round_trip_and_unknown_is_listed() {
        for kind in BackendKind::ALL {
            assert_eq!(BackendKind::parse(kind.name()).unwrap(), kind);
        }
        let err = BackendKind::parse("quantum").unwrap_err().to_string();
        assert!(err.contains("sync-constant") && err.contains("float-ref"), "{err}");
    }

    #[test]
    fn fully_accurate_backends_are_exact() {
        for kind in [BackendKind::Exact, BackendKind::Async, BackendKind::SyncAccurate] {
            let mut be = kind.instantiate(8, 0).unwrap();
            let p = be.multiply(v(3, 8), v(5, 8)).unwrap();
            assert!(p.eq_rational(&v(15, 64)), "{kind}: {p}");
            let s = be.add_scaled(v(3, 8), v(5, 8)).unwrap();
            assert!(s.eq_rational(&v(8, 16)), "{kind}: {s}");
        }
    }

    #[test]
    fn sync_constant_rounds_within_bound() {
        let mut be = BackendKind::SyncConstant.instantiate(8, 0).unwrap();
        let p = be.multiply(v(3, 8), v(7, 8)).unwrap();
        assert_eq!(p.len(), 8);
        // 21/64 = 2.625/8 rounds to within half a level
        assert!(p.diff_within(v(21, 64), 1, 16), "{p}");
        let s = be.add_scaled(v(2, 8), v(3, 8)).unwrap();
        assert_eq!(s.len(), 8);
        assert!(s.diff_within(v(5, 16), 1, 16), "{s}");
    }

    #[test]
    fn stochastic_is_seeded_and_deterministic() {
        let run = |seed: u64| {
            let mut be = BackendKind::Stochastic.instantiate(16, seed).unwrap();
            let p = be.multiply(v(8, 16), v(8, 16)).unwrap();
            let s = be.add_scaled(v(8, 16), v(4, 16)).unwrap();
            (p, s)
        };
        assert_eq!(run(7), run(7));
        // output length stays n
        assert_eq!(run(7).0.len(), 16);
    }

    #[test]
    fn resolution_checks() {
        assert!(BackendKind::SyncAccurate.check_resolution(12).is_err());
        assert!(BackendKind::SyncAccurate.check_resolution(512).is_err());
        assert!(BackendKind::Async.check_resolution(512).is_err());
        assert!(BackendKind::Async.check_resolution(200).is_ok());
        assert!(BackendKind::SyncConstant.check_resolution(7).is_err());
        assert!(BackendKind::Exact.check_resolution(1).is_err());
        assert!(BackendKind::Stochastic.check_resolution(1024).is_ok());
        assert!(BackendKind::FloatRef.instantiate(8, 0).is_err());
    }

    #[test]
    fn operand_length_mismatch_is_rejected() {
        let mut be = BackendKind::Exact.instantiate(8, 0).unwrap();
        assert!(be.multiply(v(1, 8), v(1, 16)).is_err());
    }
}
