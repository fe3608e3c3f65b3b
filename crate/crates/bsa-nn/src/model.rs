//! Network weights: a 16-H-10 fully connected net stored as row-major
//! per-layer matrices in JSON, with the training provenance kept alongside
//! so a shipped weights file can be regenerated from scratch.

use std::path::Path;

use bsa_core::StreamValue;
use serde::{Deserialize, Serialize};

use crate::dataset::{CLASSES, FEATURES};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerWeights {
    /// weights[out][in]
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub train_samples: usize,
    pub final_loss: f64,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    /// [input, hidden, output]; input and output are fixed by the task.
    pub dims: Vec<usize>,
    pub layers: Vec<LayerWeights>,
    pub metadata: ModelMetadata,
}

impl NetworkModel {
    pub fn hidden(&self) -> usize {
        self.dims[1]
    }

    /// Shape and range checks: 16-H-10 dims, consistent matrices, and every
    /// weight and bias finite in [-1, 1] (the training clip; stream encoding
    /// cannot carry larger magnitudes).
    pub fn validate(&self) -> Result<()> {
        if self.dims.len() != 3 || self.dims[0] != FEATURES || self.dims[2] != CLASSES {
            return Err(Error::Shape(format!(
                "dims must be [{FEATURES}, hidden, {CLASSES}], got {:?}",
                self.dims
            )));
        }
        if self.dims[1] == 0 {
            return Err(Error::Shape("hidden width must be >= 1".into()));
        }
        if self.layers.len() != 2 {
            return Err(Error::Shape(format!(
                "expected 2 weight layers, got {}",
                self.layers.len()
            )));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            let (fan_in, fan_out) = (self.dims[l], self.dims[l + 1]);
            if layer.weights.len() != fan_out || layer.biases.len() != fan_out {
                return Err(Error::Shape(format!(
                    "layer {l}: expected {fan_out} rows/biases, got {} rows, {} biases",
                    layer.weights.len(),
                    layer.biases.len()
                )));
            }
            for (r, row) in layer.weights.iter().enumerate() {
                if row.len() != fan_in {
                    return Err(Error::Shape(format!(
                        "layer {l} row {r}: expected {fan_in} weights, got {}",
                        row.len()
                    )));
                }
                for &w in row.iter().chain(std::iter::once(&layer.biases[r])) {
                    if !w.is_finite() || w.abs() > 1.0 {
                        return Err(Error::Shape(format!(
                            "layer {l} row {r}: weight {w} outside [-1, 1]"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: NetworkModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidArgument(format!("cannot read weights {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }
}

/// Nearest k/n with ties rounding half up; x is clamped into [0, 1] first.
pub fn quantize(x: f64, n: u64) -> StreamValue {
    debug_assert!(n >= 1);
    let x = x.clamp(0.0, 1.0);
    let k = ((x * n as f64 + 0.5).floor() as u64).min(n);
    StreamValue::new(k, n).expect("clamped k is valid")
}
