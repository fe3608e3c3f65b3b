//! Emits a synthetic dataset in pendigits CSV layout. With the default
//! generator settings the train and eval splits reproduce the committed
//! artifacts byte for byte.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bsa_nn::{synthetic, SynthConfig, DEFAULT_SYNTH};

use crate::report::resolve_out;

const TRAIN_LEN: usize = 1200;

#[derive(Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
enum Split {
    Train,
    Eval,
    Full,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Which part to emit; train and eval refer to the standard
    /// 1200/500 split of the default-sized set
    #[arg(long, value_enum, default_value_t = Split::Full)]
    split: Split,

    /// Samples per class
    #[arg(long, default_value_t = DEFAULT_SYNTH.per_class)]
    per_class: usize,

    /// Gaussian spread of each cluster in feature units
    #[arg(long, default_value_t = DEFAULT_SYNTH.spread)]
    spread: f64,

    /// Generator seed
    #[arg(long, default_value_t = DEFAULT_SYNTH.seed)]
    seed: u64,

    /// Output CSV path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,

    /// Directory that a relative --out path is resolved against
    #[arg(long, env = "BSA_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<ExitCode> {
    let cfg = SynthConfig {
        per_class: args.per_class,
        spread: args.spread,
        seed: args.seed,
    };
    let full = synthetic(cfg)?;
    let dataset = match args.split {
        Split::Full => full,
        split => {
            if full.len() < TRAIN_LEN + 1 {
                bail!(
                    "the train/eval split needs more than {TRAIN_LEN} samples, \
                     got {} (use --split full or raise --per-class)",
                    full.len()
                );
            }
            match split {
                Split::Train => full.head(TRAIN_LEN),
                _ => bsa_nn::Dataset {
                    samples: full.samples[TRAIN_LEN..].to_vec(),
                },
            }
        }
    };

    let csv = dataset.to_csv();
    match &args.out {
        Some(out) => {
            let path = resolve_out(&args.out_dir, out);
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent).with_context(|| {
                        format!("creating output directory {}", parent.display())
                    })?;
                }
            }
            std::fs::write(&path, &csv)
                .with_context(|| format!("writing dataset to {}", path.display()))?;
            eprintln!("wrote {} samples to {}", dataset.len(), path.display());
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}
