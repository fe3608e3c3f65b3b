//! Fully connected 16-H-10 digit classification where every multiply and
//! add can be swapped out: exact rationals, the deterministic stream units
//! (asynchronous, synchronous increasing-length, synchronous
//! constant-length), an LFSR-driven stochastic baseline, and a plain f64
//! reference path. Same quantized weights everywhere; only the arithmetic
//! differs.

pub mod backend;
pub mod dataset;
mod error;
pub mod forward;
pub mod model;
pub mod train;

/// Committed model and data artifacts, regenerated with
/// `cargo run --release -p bsa-nn --example freeze`.
pub mod artifacts {
    /// 16-16-10 network; small enough for fast verification sweeps.
    pub const WEIGHTS_H16: &str = include_str!("../data/weights_h16.json");
    /// 16-100-10 network; the full-width configuration.
    pub const WEIGHTS_H100: &str = include_str!("../data/weights_h100.json");
    /// The 500-sample evaluation split in pendigits CSV layout.
    pub const EVAL_CSV: &str = include_str!("../data/eval_500.csv");
}

pub use backend::{BackendKind, StreamBackend, MAX_QUADRATIC_N};
pub use dataset::{
    default_split, load_pendigits, parse_pendigits, synthetic, Dataset, Sample, SynthConfig,
    CLASSES, DEFAULT_SYNTH, FEATURES, FEATURE_MAX,
};
pub use error::{Error, Result};
pub use forward::{
    agreement, argmax, encode_features, infer, layer_forward, make_instance,
    misclassification_rate, predictions, quantize_net, BackendInstance, QuantizedLayer,
    QuantizedNet,
};
pub use model::{quantize, LayerWeights, ModelMetadata, NetworkModel};
pub use train::{train, TrainConfig};
