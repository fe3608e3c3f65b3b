//! Evaluates the digit classifier across arithmetic backends and stream
//! lengths, reporting the misclassification rate of each combination on a
//! shared dataset and shared quantized weights.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use bsa_nn::{
    artifacts, load_pendigits, parse_pendigits, predictions, quantize_net, BackendKind, Dataset,
    NetworkModel, QuantizedNet,
};
use serde_json::{json, Value};

use crate::report::{OutputArgs, Report};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Weights JSON file; default is the built-in 100-hidden model
    #[arg(long)]
    weights: Option<PathBuf>,

    /// Use the built-in compact 16-hidden model instead of the 100-hidden
    /// one; ignored when --weights is given
    #[arg(long)]
    small: bool,

    /// Dataset CSV in pendigits layout; default is the built-in 500-sample
    /// evaluation split
    #[arg(long)]
    dataset: Option<PathBuf>,

    /// Stream lengths to evaluate
    #[arg(long = "n", value_delimiter = ',', default_value = "8,16,32,64,128,256")]
    n: Vec<u64>,

    /// Backends to evaluate, comma separated; "all" selects every backend
    #[arg(long, value_delimiter = ',', default_value = "all")]
    backends: Vec<String>,

    /// Evaluate only the first SAMPLES samples; 0 means the whole dataset.
    /// The default keeps the full six-backend sweep near a minute; the
    /// increasing-length backends at n = 256 dominate the cost
    #[arg(long, default_value_t = 100)]
    samples: usize,

    /// Base seed for the stochastic backend
    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[command(flatten)]
    output: OutputArgs,
}

fn load_model(args: &Args) -> Result<(NetworkModel, String)> {
    match &args.weights {
        Some(path) => Ok((NetworkModel::load(path)?, path.display().to_string())),
        None if args.small => Ok((
            NetworkModel::from_json(artifacts::WEIGHTS_H16)?,
            "builtin:h16".into(),
        )),
        None => Ok((
            NetworkModel::from_json(artifacts::WEIGHTS_H100)?,
            "builtin:h100".into(),
        )),
    }
}

fn load_dataset(args: &Args) -> Result<(Dataset, String)> {
    match &args.dataset {
        Some(path) => Ok((load_pendigits(path)?, path.display().to_string())),
        None => Ok((parse_pendigits(artifacts::EVAL_CSV)?, "builtin:eval".into())),
    }
}

pub fn run(args: Args) -> Result<ExitCode> {
    let (model, model_name) = load_model(&args)?;
    let (mut dataset, dataset_name) = load_dataset(&args)?;
    if args.samples > 0 {
        dataset = dataset.head(args.samples);
    }
    if dataset.is_empty() {
        bail!("dataset {dataset_name} has no samples");
    }

    let mut backends: Vec<BackendKind> = Vec::new();
    for name in &args.backends {
        if name == "all" {
            for kind in BackendKind::ALL {
                if !backends.contains(&kind) {
                    backends.push(kind);
                }
            }
            continue;
        }
        let kind = BackendKind::parse(name)?;
        if !backends.contains(&kind) {
            backends.push(kind);
        }
    }
    if backends.is_empty() {
        bail!("no backends requested");
    }
    if args.n.is_empty() {
        bail!("no stream lengths requested");
    }

    let config = json!({
        "weights": model_name,
        "hidden": model.hidden(),
        "dataset": dataset_name,
        "samples": dataset.len(),
        "n": args.n,
        "backends": backends.iter().map(|b| b.name()).collect::<Vec<_>>(),
        "seed": args.seed,
    });
    let mut report = Report::new(
        "nn-eval",
        config,
        &["backend", "n", "status", "mr", "errors", "samples", "seed", "note"],
    );

    let mut qnets: BTreeMap<u64, QuantizedNet> = BTreeMap::new();
    for &kind in &backends {
        for &n in &args.n {
            if let Err(e) = kind.check_resolution(n) {
                report.row(vec![
                    json!(kind.name()),
                    json!(n),
                    json!("skipped"),
                    Value::Null,
                    Value::Null,
                    json!(dataset.len()),
                    json!(args.seed),
                    json!(e.to_string()),
                ]);
                continue;
            }
            if let Entry::Vacant(slot) = qnets.entry(n) {
                slot.insert(quantize_net(&model, n)?);
            }
            let qnet = &qnets[&n];
            let preds = predictions(qnet, &dataset, kind, args.seed)?;
            let errors = preds
                .iter()
                .zip(&dataset.samples)
                .filter(|(p, s)| **p != s.label)
                .count();
            let mr = errors as f64 / dataset.len() as f64;
            report.row(vec![
                json!(kind.name()),
                json!(n),
                json!("ok"),
                json!(mr),
                json!(errors),
                json!(dataset.len()),
                json!(args.seed),
                json!(""),
            ]);
        }
    }

    args.output.write(&report)?;
    Ok(ExitCode::SUCCESS)
}
