//! Trains the classifier with deterministic full-batch gradient descent and
//! writes the resulting weights JSON.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use bsa_nn::{default_split, load_pendigits, train, Dataset, TrainConfig};
use serde_json::json;

use crate::report::{resolve_out, Format, Report};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Hidden layer width
    #[arg(long, default_value_t = 100)]
    hidden: usize,

    /// Full-batch epochs
    #[arg(long, default_value_t = 600)]
    epochs: usize,

    /// Gradient descent step size
    #[arg(long, default_value_t = 0.8)]
    learning_rate: f64,

    /// Weight initialization seed
    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Training CSV in pendigits layout; default is the built-in
    /// 1200-sample train split
    #[arg(long)]
    dataset: Option<PathBuf>,

    /// Where to write the weights JSON
    #[arg(long, default_value = "weights.json")]
    out: PathBuf,

    /// Directory that a relative --out path is resolved against
    #[arg(long, env = "BSA_OUT_DIR")]
    out_dir: Option<PathBuf>,

    /// Summary format, printed to stdout
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

pub fn run(args: Args) -> Result<ExitCode> {
    let (dataset, dataset_name): (Dataset, String) = match &args.dataset {
        Some(path) => (load_pendigits(path)?, path.display().to_string()),
        None => (default_split()?.0, "builtin:train".into()),
    };

    let cfg = TrainConfig {
        hidden: args.hidden,
        epochs: args.epochs,
        learning_rate: args.learning_rate,
        seed: args.seed,
    };
    let mut model = train(&dataset, cfg)?;
    model.metadata.note = format!("bsa nn-train, dataset {dataset_name}");

    let path = resolve_out(&args.out_dir, &args.out);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating output directory {}", parent.display()))?;
        }
    }
    model
        .save(&path)
        .with_context(|| format!("writing weights to {}", path.display()))?;

    let config = json!({
        "hidden": args.hidden,
        "epochs": args.epochs,
        "learning_rate": args.learning_rate,
        "seed": args.seed,
        "dataset": dataset_name,
    });
    let mut report = Report::new(
        "nn-train",
        config,
        &["hidden", "epochs", "learning_rate", "seed", "train_samples", "final_loss", "weights"],
    );
    report.row(vec![
        json!(args.hidden),
        json!(args.epochs),
        json!(args.learning_rate),
        json!(args.seed),
        json!(dataset.len()),
        json!(model.metadata.final_loss),
        json!(path.display().to_string()),
    ]);
    print!("{}", report.render(args.format));
    Ok(ExitCode::SUCCESS)
}
