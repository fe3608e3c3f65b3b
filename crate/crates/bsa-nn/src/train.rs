//! Offline training with exact f64 arithmetic. Plain full-batch gradient
//! descent on mean squared error against one-hot targets, deterministic
//! under its seed. Weights and biases are clipped into [-1, 1] after every
//! step so the trained model stays encodable as stream magnitudes; the
//! hidden activation is the same clipped ReLU the inference path applies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, CLASSES, FEATURES};
use crate::error::{Error, Result};
use crate::model::{LayerWeights, ModelMetadata, NetworkModel};

#[derive(Clone, Copy, Debug)]
pub struct TrainConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: 100,
            epochs: 600,
            learning_rate: 0.8,
            seed: 7,
        }
    }
}

struct Gradients {
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<Vec<f64>>,
    b2: Vec<f64>,
}

// `!(x > 0.0)` instead of `x <= 0.0`: the negated form also rejects NaN.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn train(dataset: &Dataset, cfg: TrainConfig) -> Result<NetworkModel> {
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("training dataset is empty".into()));
    }
    if cfg.hidden == 0 || cfg.epochs == 0 {
        return Err(Error::InvalidArgument(
            "hidden width and epochs must be >= 1".into(),
        ));
    }
    if !(cfg.learning_rate > 0.0) || !cfg.learning_rate.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "learning rate must be positive, got {}",
            cfg.learning_rate
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut init = |fan_in: usize, fan_out: usize| -> Vec<Vec<f64>> {
        let r = 1.0 / (fan_in as f64).sqrt();
        (0..fan_out)
            .map(|_| (0..fan_in).map(|_| rng.gen_range(-r..r)).collect())
            .collect()
    };
    let mut w1 = init(FEATURES, cfg.hidden);
    let mut w2 = init(cfg.hidden, CLASSES);
    let mut b1 = vec![0.0; cfg.hidden];
    let mut b2 = vec![0.0; CLASSES];

    let inputs: Vec<[f64; FEATURES]> = dataset
        .samples
        .iter()
        .map(|s| {
            let mut x = [0.0; FEATURES];
            for (xi, &f) in x.iter_mut().zip(&s.features) {
                *xi = f as f64 / 100.0;
            }
            x
        })
        .collect();
    let batch = dataset.len() as f64;
    let mut final_loss = f64::INFINITY;

    for _ in 0..cfg.epochs {
        let mut grads = Gradients {
            w1: vec![vec![0.0; FEATURES]; cfg.hidden],
            b1: vec![0.0; cfg.hidden],
            w2: vec![vec![0.0; cfg.hidden]; CLASSES],
            b2: vec![0.0; CLASSES],
        };
        let mut loss = 0.0;

        for (x, sample) in inputs.iter().zip(&dataset.samples) {
            // forward
            let z1: Vec<f64> = (0..cfg.hidden)
                .map(|h| w1[h].iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b1[h])
                .collect();
            let a1: Vec<f64> = z1.iter().map(|&z| z.clamp(0.0, 1.0)).collect();
            let z2: Vec<f64> = (0..CLASSES)
                .map(|o| w2[o].iter().zip(&a1).map(|(w, a)| w * a).sum::<f64>() + b2[o])
                .collect();

            // mean squared error against one-hot
            let mut dz2 = [0.0; CLASSES];
            for (o, item) in dz2.iter_mut().enumerate() {
                let target = if o == sample.label as usize { 1.0 } else { 0.0 };
                let diff = z2[o] - target;
                loss += diff * diff;
                *item = 2.0 * diff / CLASSES as f64;
            }

            // backward
            for (o, &d) in dz2.iter().enumerate() {
                for (g, a) in grads.w2[o].iter_mut().zip(&a1) {
                    *g += d * a;
                }
                grads.b2[o] += d;
            }
            for h in 0..cfg.hidden {
                if z1[h] <= 0.0 || z1[h] >= 1.0 {
                    continue; // clipped-ReLU gradient is zero outside (0, 1)
                }
                let da: f64 = (0..CLASSES).map(|o| dz2[o] * w2[o][h]).sum();
                for (g, xi) in grads.w1[h].iter_mut().zip(x) {
                    *g += da * xi;
                }
                grads.b1[h] += da;
            }
        }

        let step = cfg.learning_rate / batch;
        let clip = |w: f64| w.clamp(-1.0, 1.0);
        for h in 0..cfg.hidden {
            for (w, g) in w1[h].iter_mut().zip(&grads.w1[h]) {
                *w = clip(*w - step * g);
            }
            b1[h] = clip(b1[h] - step * grads.b1[h]);
        }
        for o in 0..CLASSES {
            for (w, g) in w2[o].iter_mut().zip(&grads.w2[o]) {
                *w = clip(*w - step * g);
            }
            b2[o] = clip(b2[o] - step * grads.b2[o]);
        }
        final_loss = loss / (batch * CLASSES as f64);
    }

    let model = NetworkModel {
        dims: vec![FEATURES, cfg.hidden, CLASSES],
        layers: vec![
            LayerWeights {
                weights: w1,
                biases: b1,
            },
            LayerWeights {
                weights: w2,
                biases: b2,
            },
        ],
        metadata: ModelMetadata {
            seed: cfg.seed,
            epochs: cfg.epochs,
            learning_rate: cfg.learning_rate,
            train_samples: dataset.len(),
            final_loss,
            note: String::new(),
        },
    };
    model.validate()?;
    Ok(model)
}
