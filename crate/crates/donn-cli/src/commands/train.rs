//! `donn train`: train an FC model on MNIST and persist the weights.

use std::path::Path;

use donn::mnist::{MnistSet, Split};
use donn::network::{self, Arch};
use donn::report::{write_report, RunReport};

use super::Context;
use crate::{config, CliError};

pub struct Overrides {
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub batch: Option<usize>,
    pub dropout: Option<f64>,
    pub momentum: Option<f64>,
    pub limit: Option<usize>,
}

pub fn run(
    ctx: &Context,
    arch_name: &str,
    data_dir: Option<&Path>,
    out: Option<&Path>,
    overrides: Overrides,
    export_json: Option<&Path>,
) -> Result<(), CliError> {
    let arch = Arch::from_name(arch_name)
        .ok_or_else(|| CliError::usage(format!("unknown --arch '{arch_name}'; expected 2layer or 3layer")))?;
    let mut cfg = ctx.file_cfg.train_config();
    if let Some(v) = overrides.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = overrides.lr {
        cfg.learning_rate = v;
    }
    if let Some(v) = overrides.batch {
        cfg.batch_size = v;
    }
    if let Some(v) = overrides.dropout {
        cfg.dropout = v;
    }
    if let Some(v) = overrides.momentum {
        cfg.momentum = v;
    }

    let dir = config::data_dir(data_dir, &ctx.file_cfg);
    let train_set = MnistSet::load(&dir, Split::Train, overrides.limit)?;
    println!(
        "loaded {} training images from {}",
        train_set.count,
        dir.display()
    );
    let (inputs, labels) = network::preprocess_set(&train_set)?;

    let t0 = std::time::Instant::now();
    let mut last_loss = f64::NAN;
    let model = network::train_with_progress(&inputs, &labels, arch, &cfg, ctx.seed, |e, loss| {
        println!("epoch {:>3}: mean train loss {loss:.4}", e + 1);
        last_loss = loss;
    })?;
    let train_seconds = t0.elapsed().as_secs_f64();
    println!("trained {} in {train_seconds:.1} s", arch.name());

    // Float accuracy on the standard 500-image slice as a quick check.
    let test_accuracy = match MnistSet::load(&dir, Split::Test, Some(500)) {
        Ok(test_set) => {
            let (tx, ty) = network::preprocess_set(&test_set)?;
            let mut correct = 0usize;
            for (x, &y) in tx.iter().zip(&ty) {
                let scores = model.forward_float(x)?;
                let pred = scores
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                if pred == y as usize {
                    correct += 1;
                }
            }
            let acc = correct as f64 / tx.len() as f64;
            println!(
                "float accuracy on first {} test images: {:.1}%",
                tx.len(),
                100.0 * acc
            );
            Some(acc)
        }
        Err(_) => None,
    };

    let default_path = ctx.out_dir.join(format!("model_{}.bin", arch.name()));
    let model_path = out.unwrap_or(&default_path);
    model.save_binary(model_path)?;
    println!("model written to {}", model_path.display());
    if let Some(json_path) = export_json {
        std::fs::write(json_path, model.to_json()?)
            .map_err(|e| CliError::runtime(format!("cannot write {json_path:?}: {e}")))?;
        println!("weights exported to {}", json_path.display());
    }

    let mut report = RunReport::new(
        "train",
        ctx.seed,
        serde_json::json!({
            "arch": arch.name(),
            "train": cfg,
            "images": train_set.count,
            "data_dir": dir,
            "model_path": model_path,
        }),
    );
    report.set_metric("final_train_loss", last_loss);
    if let Some(acc) = test_accuracy {
        report.accuracy = Some(acc);
    }
    report.stamp(train_seconds);
    write_report(&report, &ctx.out_dir.join("train_report.json"))?;
    Ok(())
}
