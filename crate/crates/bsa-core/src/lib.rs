//! Bit-exact simulation of bit stream arithmetic.
//!
//! A stream of n bits encodes the value k/n, where k is the number of ones;
//! the order of the bits carries no value information. This crate models the
//! units that compute on such streams:
//!
//! * asynchronous fully accurate units ([`aisa_add`], [`aism_multiply`]),
//!   which assemble the exact result by routing delayed copies of the inputs,
//! * synchronous fully accurate units ([`sisa_add`], [`sism_multiply`]),
//!   which latch a count and re-emit it with weighted select logic,
//! * synchronous constant-length units ([`scsa_add2`], [`scsm_multiply`]),
//!   which keep the output as long as the inputs and absorb the inevitable
//!   rounding into a bounded carry,
//! * a conventional stochastic baseline ([`stochastic`]) built from LFSR
//!   number generators, AND multipliers, and MUX adders.
//!
//! The [`timing`] module views streams as voltage traces and measures how
//! much value survives pulse-level faults. Everything is deterministic:
//! given the same inputs and seeds, every function returns the same bits.

mod async_units;
mod descriptor;
mod error;
mod reference;
pub mod stochastic;
mod stream;
mod sync_units;
pub mod timing;
mod units;

pub use async_units::{
    aisa_add, aism_multiply, aism_multiply_scheduled, aism_schedule, aism_slot_map,
    inverter_budget, DelaySchedule, GateDelay, InverterBudget,
};
pub use descriptor::{Accuracy, UnitDescriptor, UnitKind, MAX_UNIT_INPUT_LEN};
pub use error::{Error, Result};
pub use reference::algorithm1_regenerate;
pub use stream::{canonical_stream, concat_runs, BitStream, StreamValue};
pub use sync_units::{
    scsa_add2, scsa_add2_traced, scsa_add_n, scsm_multiply, scsm_multiply_traced,
    scsm_regenerate, sisa_add, sism_multiply, trace_to_json_lines, ScsaState, ScsmState,
    StepTrace,
};
pub use timing::{
    correctness, integrity, perturb, to_trace, CorrectnessResult, FaultModel, GlitchSpec,
    PerturbLog, PulseTrace, Segment,
};
pub use units::{
    error_bound, evaluate_unit, ideal_value, successive_run, unit_arity, SuccessiveRun,
};
