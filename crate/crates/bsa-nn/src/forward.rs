//! Forward pass over a quantized network.
//!
//! The layer recipe, identical for every backend: quantize inputs and weight
//! magnitudes onto the k/n grid, multiply each input with the positive and
//! negative weight magnitudes in the stream domain, reduce each sign group
//! with a balanced tree of scaled adders (zero-padded to a power of two, so
//! the root carries exactly sum/2^depth), convert both roots back to binary,
//! subtract, add the bias, and apply the activation in the binary domain.
//! Sign never enters the stream domain; streams only carry magnitudes.
//!
//! The float path runs the same recipe in f64 on the same quantized values.
//! Every intermediate there is a dyadic rational with a small numerator, so
//! f64 represents it exactly and the float path is a true oracle for the
//! fully accurate stream backends, not an approximation of them.

use bsa_core::stochastic::mix_seed;
use bsa_core::StreamValue;
use rayon::prelude::*;

use crate::backend::{BackendKind, StreamBackend};
use crate::dataset::{Dataset, FEATURES};
use crate::error::{Error, Result};
use crate::model::{quantize, NetworkModel};

#[derive(Clone, Debug)]
pub struct QuantizedLayer {
    /// Positive weight magnitudes, quantized; [out][in].
    pub pos: Vec<Vec<StreamValue>>,
    /// Negative weight magnitudes, quantized; [out][in].
    pub neg: Vec<Vec<StreamValue>>,
    /// Signed biases, already snapped to the k/n grid.
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct QuantizedNet {
    pub n: u64,
    pub layers: Vec<QuantizedLayer>,
}

/// Quantizes a validated model at resolution n: each weight splits into a
/// positive and a negative magnitude (one of them zero), each snapped to
/// k/n; biases snap to the same grid but keep their sign.
pub fn quantize_net(model: &NetworkModel, n: u64) -> Result<QuantizedNet> {
    model.validate()?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "resolution n must be >= 2, got {n}"
        )));
    }
    let layers = model
        .layers
        .iter()
        .map(|layer| {
            let pos = layer
                .weights
                .iter()
                .map(|row| row.iter().map(|&w| quantize(w.max(0.0), n)).collect())
                .collect();
            let neg = layer
                .weights
                .iter()
                .map(|row| row.iter().map(|&w| quantize((-w).max(0.0), n)).collect())
                .collect();
            let bias = layer
                .biases
                .iter()
                .map(|&b| {
                    let mag = quantize(b.abs(), n).as_f64();
                    if b < 0.0 {
                        -mag
                    } else {
                        mag
                    }
                })
                .collect();
            QuantizedLayer { pos, neg, bias }
        })
        .collect();
    Ok(QuantizedNet { n, layers })
}

/// Input features normalized by 100 and quantized onto the k/n grid.
pub fn encode_features(features: &[u8; FEATURES], n: u64) -> Vec<StreamValue> {
    features
        .iter()
        .map(|&f| quantize(f as f64 / 100.0, n))
        .collect()
}

/// Balanced scaled-adder tree. Pads the leaf level with zero values to the
/// next power of two and halves the level width until one root remains;
/// root value = (sum of leaves) / 2^depth for exact adders.
pub fn tree_reduce(
    mut level: Vec<StreamValue>,
    backend: &mut dyn StreamBackend,
) -> Result<(StreamValue, u32)> {
    if level.is_empty() {
        return Err(Error::Shape("cannot reduce an empty product list".into()));
    }
    let leaf_len = level[0].len();
    let depth = (level.len() as u64).next_power_of_two().trailing_zeros();
    level.resize(
        1 << depth,
        StreamValue::new(0, leaf_len).expect("zero value of leaf length"),
    );
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len() / 2);
        for pair in level.chunks(2) {
            next.push(backend.add_scaled(pair[0], pair[1])?);
        }
        level = next;
    }
    Ok((level[0], depth))
}

fn group_sum(
    inputs: &[StreamValue],
    row: &[StreamValue],
    backend: &mut dyn StreamBackend,
) -> Result<f64> {
    debug_assert_eq!(inputs.len(), row.len());
    let mut products = Vec::with_capacity(row.len());
    for (x, w) in inputs.iter().zip(row) {
        products.push(backend.multiply(*x, *w)?);
    }
    let (root, depth) = tree_reduce(products, backend)?;
    Ok(root.as_f64() * (1u64 << depth) as f64)
}

/// Pre-activation scores of one layer in the stream domain.
pub fn layer_forward(
    inputs: &[StreamValue],
    layer: &QuantizedLayer,
    backend: &mut dyn StreamBackend,
) -> Result<Vec<f64>> {
    let mut scores = Vec::with_capacity(layer.pos.len());
    for r in 0..layer.pos.len() {
        if layer.pos[r].len() != inputs.len() {
            return Err(Error::Shape(format!(
                "layer expects {} inputs, got {}",
                layer.pos[r].len(),
                inputs.len()
            )));
        }
        let pos = group_sum(inputs, &layer.pos[r], backend)?;
        let neg = group_sum(inputs, &layer.neg[r], backend)?;
        scores.push(pos - neg + layer.bias[r]);
    }
    Ok(scores)
}

/// The clipped-ReLU activation used between layers; training and every
/// inference backend share it. The clip at 1 keeps activations encodable.
fn activate(s: f64) -> f64 {
    s.clamp(0.0, 1.0)
}

/// Output scores via a stream backend: hidden activations are re-quantized
/// onto the k/n grid between layers (the binary-domain counter reconversion),
/// the final layer's scores stay in the binary domain.
pub fn stream_scores(
    qnet: &QuantizedNet,
    features: &[u8; FEATURES],
    backend: &mut dyn StreamBackend,
) -> Result<Vec<f64>> {
    let mut acts = encode_features(features, qnet.n);
    let last = qnet.layers.len() - 1;
    for (l, layer) in qnet.layers.iter().enumerate() {
        let scores = layer_forward(&acts, layer, backend)?;
        if l == last {
            return Ok(scores);
        }
        acts = scores
            .iter()
            .map(|&s| quantize(activate(s), qnet.n))
            .collect();
    }
    unreachable!("validated models have at least one layer")
}

/// Output scores via the f64 reference path on the same quantized values.
pub fn float_scores(qnet: &QuantizedNet, features: &[u8; FEATURES]) -> Result<Vec<f64>> {
    let mut acts: Vec<f64> = encode_features(features, qnet.n)
        .iter()
        .map(StreamValue::as_f64)
        .collect();
    let last = qnet.layers.len() - 1;
    for (l, layer) in qnet.layers.iter().enumerate() {
        let mut scores = Vec::with_capacity(layer.pos.len());
        for r in 0..layer.pos.len() {
            if layer.pos[r].len() != acts.len() {
                return Err(Error::Shape(format!(
                    "layer expects {} inputs, got {}",
                    layer.pos[r].len(),
                    acts.len()
                )));
            }
            let pos: f64 = acts
                .iter()
                .zip(&layer.pos[r])
                .map(|(x, w)| x * w.as_f64())
                .sum();
            let neg: f64 = acts
                .iter()
                .zip(&layer.neg[r])
                .map(|(x, w)| x * w.as_f64())
                .sum();
            scores.push(pos - neg + layer.bias[r]);
        }
        if l == last {
            return Ok(scores);
        }
        acts = scores
            .iter()
            .map(|&s| quantize(activate(s), qnet.n).as_f64())
            .collect();
    }
    unreachable!("validated models have at least one layer")
}

/// Argmax with ties broken toward the lowest index.
pub fn argmax(scores: &[f64]) -> u8 {
    let mut best = 0usize;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best as u8
}

/// One evaluation context: either the float reference or a stream backend.
pub enum BackendInstance {
    Float,
    Stream(Box<dyn StreamBackend>),
}

pub fn make_instance(kind: BackendKind, n: u64, seed: u64) -> Result<BackendInstance> {
    kind.check_resolution(n)?;
    Ok(match kind {
        BackendKind::FloatRef => BackendInstance::Float,
        _ => BackendInstance::Stream(kind.instantiate(n, seed)?),
    })
}

pub fn infer(
    qnet: &QuantizedNet,
    features: &[u8; FEATURES],
    instance: &mut BackendInstance,
) -> Result<u8> {
    let scores = match instance {
        BackendInstance::Float => float_scores(qnet, features)?,
        BackendInstance::Stream(be) => stream_scores(qnet, features, be.as_mut())?,
    };
    Ok(argmax(&scores))
}

/// Predicted labels for every sample. Each sample gets its own backend
/// seeded from (seed, index), so results are identical no matter how rayon
/// schedules the work.
pub fn predictions(
    qnet: &QuantizedNet,
    dataset: &Dataset,
    kind: BackendKind,
    seed: u64,
) -> Result<Vec<u8>> {
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("dataset is empty".into()));
    }
    kind.check_resolution(qnet.n)?;
    dataset
        .samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut instance = make_instance(kind, qnet.n, mix_seed(seed, i as u64, 0xA5))?;
            infer(qnet, &s.features, &mut instance)
        })
        .collect()
}

pub fn misclassification_rate(
    qnet: &QuantizedNet,
    dataset: &Dataset,
    kind: BackendKind,
    seed: u64,
) -> Result<f64> {
    let preds = predictions(qnet, dataset, kind, seed)?;
    let wrong = preds
        .iter()
        .zip(&dataset.samples)
        .filter(|(p, s)| **p != s.label)
        .count();
    Ok(wrong as f64 / dataset.len() as f64)
}

/// Fraction of positions where the two prediction vectors agree.
pub fn agreement(a: &[u8], b: &[u8]) -> f64 {
    assert_eq!(a.len(), b.len());
    if a.is_empty() {
        return 1.0;
    }
    let same = a.iter().zip(b).filter(|(x, y)| x == y).count();
    same as f64 / a.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synthetic, SynthConfig};
    use crate::model::{LayerWeights, ModelMetadata};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(k: u64, n: u64) -> StreamValue {
        StreamValue::new(k, n).unwrap()
    }

    fn random_layer(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize, n: u64) -> QuantizedLayer {
        let mut rows = |_: ()| -> Vec<Vec<StreamValue>> {
            (0..fan_out)
                .map(|_| (0..fan_in).map(|_| v(rng.gen_range(0..=n), n)).collect())
                .collect()
        };
        let pos = rows(());
        let neg = rows(());
        let bias = (0..fan_out)
            .map(|_| {
                let k = rng.gen_range(0..=n) as f64 / n as f64;
                if rng.gen_bool(0.5) {
                    -k
                } else {
                    k
                }
            })
            .collect();
        QuantizedLayer { pos, neg, bias }
    }

    fn mirror_layer_float(inputs: &[f64], layer: &QuantizedLayer) -> Vec<f64> {
        (0..layer.pos.len())
            .map(|r| {
                let pos: f64 = inputs
                    .iter()
                    .zip(&layer.pos[r])
                    .map(|(x, w)| x * w.as_f64())
                    .sum();
                let neg: f64 = inputs
                    .iter()
                    .zip(&layer.neg[r])
                    .map(|(x, w)| x * w.as_f64())
                    .sum();
                pos - neg + layer.bias[r]
            })
            .collect()
    }

    #[test]
    fn single_unit_weight_passes_value_through() {
        let layer = QuantizedLayer {
            pos: vec![vec![v(8, 8)]],
            neg: vec![vec![v(0, 8)]],
            bias: vec![0.0],
        };
        let mut be = BackendKind::Exact.instantiate(8, 0).unwrap();
        let out = layer_forward(&[v(4, 8)], &layer, be.as_mut()).unwrap();
        assert_eq!(out, vec![0.5]);
    }

    #[test]
    fn all_zero_weights_yield_zero_after_activation() {
        let layer = QuantizedLayer {
            pos: vec![vec![v(0, 8); 4]; 3],
            neg: vec![vec![v(0, 8); 4]; 3],
            bias: vec![0.0; 3],
        };
        let mut be = BackendKind::Async.instantiate(8, 0).unwrap();
        let inputs = vec![v(5, 8); 4];
        for s in layer_forward(&inputs, &layer, be.as_mut()).unwrap() {
            assert_eq!(activate(s), 0.0);
        }
    }

    #[test]
    fn fully_accurate_backends_match_float_mirror_exhaustively() {
        // every input combination at n = 8 over a random 4x4 layer
        let n = 8u64;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let layer = random_layer(&mut rng, 4, 4, n);
        let kinds = [
            BackendKind::Exact,
            BackendKind::Async,
            BackendKind::SyncAccurate,
        ];
        for k0 in 0..=n {
            for k1 in 0..=n {
                for k2 in 0..=n {
                    for k3 in 0..=n {
                        let inputs = [v(k0, n), v(k1, n), v(k2, n), v(k3, n)];
                        let floats: Vec<f64> = inputs.iter().map(StreamValue::as_f64).collect();
                        let expect = mirror_layer_float(&floats, &layer);
                        for kind in kinds {
                            let mut be = kind.instantiate(n, 0).unwrap();
                            let got = layer_forward(&inputs, &layer, be.as_mut()).unwrap();
                            assert_eq!(got, expect, "{kind} diverged at {k0},{k1},{k2},{k3}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn fully_accurate_backends_match_float_mirror_sampled_n16() {
        let n = 16u64;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let layer = random_layer(&mut rng, 4, 4, n);
        for _ in 0..400 {
            let inputs: Vec<StreamValue> = (0..4).map(|_| v(rng.gen_range(0..=n), n)).collect();
            let floats: Vec<f64> = inputs.iter().map(StreamValue::as_f64).collect();
            let expect = mirror_layer_float(&floats, &layer);
            for kind in [
                BackendKind::Exact,
                BackendKind::Async,
                BackendKind::SyncAccurate,
            ] {
                let mut be = kind.instantiate(n, 0).unwrap();
                let got = layer_forward(&inputs, &layer, be.as_mut()).unwrap();
                assert_eq!(got, expect, "{kind} diverged");
            }
        }
    }

    #[test]
    fn semi_accurate_error_stays_under_reduction_path_bound() {
        // per sign group: one multiply plus depth adders, each within 0.5/n
        // of exact, and each adder halves its operands' inherited error:
        // root error <= (depth + 1) * 0.5/n, so scores differ by at most
        // 2^depth * 2 groups * that bound
        let n = 16u64;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let layer = random_layer(&mut rng, 4, 4, n);
            let inputs: Vec<StreamValue> = (0..4).map(|_| v(rng.gen_range(0..=n), n)).collect();
            let floats: Vec<f64> = inputs.iter().map(StreamValue::as_f64).collect();
            let exact = mirror_layer_float(&floats, &layer);
            let mut be = BackendKind::SyncConstant.instantiate(n, 0).unwrap();
            let got = layer_forward(&inputs, &layer, be.as_mut()).unwrap();
            let depth = 2u32; // 4 leaves
            let bound = 2.0 * (1 << depth) as f64 * (depth as f64 + 1.0) * 0.5 / n as f64;
            for (g, e) in got.iter().zip(&exact) {
                assert!(
                    (g - e).abs() <= bound + 1e-12,
                    "error {} above bound {bound}",
                    (g - e).abs()
                );
            }
        }
    }

    #[test]
    fn tree_reduce_scale_bookkeeping() {
        let mut be = BackendKind::Exact.instantiate(8, 0).unwrap();
        // five leaves pad to eight: depth 3
        let leaves = vec![v(1, 8), v(2, 8), v(3, 8), v(4, 8), v(5, 8)];
        let (root, depth) = tree_reduce(leaves, be.as_mut()).unwrap();
        assert_eq!(depth, 3);
        let total = root.as_f64() * 8.0;
        assert_eq!(total, 15.0 / 8.0);
        assert!(tree_reduce(vec![], be.as_mut()).is_err());
    }

    fn fixture_model(hidden: usize, seed: u64) -> NetworkModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layer = |fan_in: usize, fan_out: usize| LayerWeights {
            weights: (0..fan_out)
                .map(|_| (0..fan_in).map(|_| rng.gen_range(-0.4..0.4)).collect())
                .collect(),
            biases: (0..fan_out).map(|_| rng.gen_range(-0.2..0.2)).collect(),
        };
        NetworkModel {
            dims: vec![FEATURES, hidden, 10],
            layers: vec![layer(FEATURES, hidden), layer(hidden, 10)],
            metadata: ModelMetadata {
                seed,
                epochs: 0,
                learning_rate: 0.0,
                train_samples: 0,
                final_loss: 0.0,
                note: "random fixture".into(),
            },
        }
    }

    #[test]
    fn float_and_exact_inference_agree_end_to_end() {
        let model = fixture_model(6, 11);
        let ds = synthetic(SynthConfig {
            per_class: 3,
            ..SynthConfig::default()
        })
        .unwrap();
        for n in [8u64, 64, 256] {
            let qnet = quantize_net(&model, n).unwrap();
            let float = predictions(&qnet, &ds, BackendKind::FloatRef, 1).unwrap();
            let exact = predictions(&qnet, &ds, BackendKind::Exact, 1).unwrap();
            assert_eq!(float, exact, "n = {n}");
        }
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[0.0, 0.0, 0.0]), 0);
        assert_eq!(argmax(&[1.0, 2.0, 2.0]), 1);
        assert_eq!(argmax(&[-3.0, -1.0, -2.0]), 1);
    }

    #[test]
    fn constant_predictor_on_balanced_data_misses_ninety_percent() {
        let mut model = fixture_model(4, 0);
        for layer in &mut model.layers {
            for row in &mut layer.weights {
                row.iter_mut().for_each(|w| *w = 0.0);
            }
            layer.biases.iter_mut().for_each(|b| *b = 0.0);
        }
        model.layers[1].biases[3] = 0.5; // always predicts class 3
        let qnet = quantize_net(&model, 8).unwrap();
        let ds = synthetic(SynthConfig {
            per_class: 10,
            ..SynthConfig::default()
        })
        .unwrap();
        let mr = misclassification_rate(&qnet, &ds, BackendKind::FloatRef, 0).unwrap();
        assert!((mr - 0.9).abs() < 1e-12, "mr {mr}");
    }

    #[test]
    fn stochastic_predictions_are_reproducible() {
        let model = fixture_model(5, 3);
        let qnet = quantize_net(&model, 16).unwrap();
        let ds = synthetic(SynthConfig {
            per_class: 2,
            ..SynthConfig::default()
        })
        .unwrap();
        let a = predictions(&qnet, &ds, BackendKind::Stochastic, 9).unwrap();
        let b = predictions(&qnet, &ds, BackendKind::Stochastic, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let qnet = quantize_net(&fixture_model(4, 0), 8).unwrap();
        let empty = Dataset::default();
        assert!(predictions(&qnet, &empty, BackendKind::FloatRef, 0).is_err());
    }
}
