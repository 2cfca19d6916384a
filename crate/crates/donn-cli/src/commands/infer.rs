//! `donn infer`: classify test images through the simulated hardware and
//! write the full run report.

use std::path::Path;

use donn::dataflow::SimMode;
use donn::energy;
use donn::mnist::{MnistSet, Split};
use donn::network::{self, FcnnModel};
use donn::report::{write_report, RunReport};

use super::Context;
use crate::{config, CliError};

#[allow(clippy::too_many_arguments)]
pub fn run(
    ctx: &Context,
    model_path: &Path,
    data_dir: Option<&Path>,
    mode_name: &str,
    images: usize,
    xi: Option<f64>,
    np: Option<f64>,
    temp: Option<f64>,
) -> Result<(), CliError> {
    let mode = match mode_name {
        "ideal" => SimMode::Ideal,
        "optical" => SimMode::Optical,
        "electrical" => SimMode::Electrical,
        other => {
            return Err(CliError::usage(format!(
                "unknown --mode '{other}'; expected ideal, optical or electrical"
            )))
        }
    };
    if images == 0 {
        return Err(CliError::usage("--images must be >= 1"));
    }
    let model = FcnnModel::load_binary(model_path)?;
    let dir = config::data_dir(data_dir, &ctx.file_cfg);
    let test_set = MnistSet::load(&dir, Split::Test, Some(images))?;
    let (inputs, labels) = network::preprocess_set(&test_set)?;

    let mut channel_cfg = ctx.file_cfg.channel_config(ctx.seed)?;
    if let Some(v) = xi {
        channel_cfg.xtalk_fraction = v;
    }
    if let Some(v) = np {
        channel_cfg.photons_per_bit = v;
    }
    if let Some(v) = temp {
        channel_cfg.temperature_k = v;
    }
    let energy_cfg = ctx.file_cfg.energy_config();

    let t0 = std::time::Instant::now();
    let eval = network::confusion_and_scores(
        &model,
        &inputs,
        &labels,
        mode,
        &channel_cfg,
        &energy_cfg,
    )?;
    println!(
        "{} mode: {}/{} correct = {:.1}%",
        mode_name,
        (eval.accuracy * eval.images as f64).round() as usize,
        eval.images,
        100.0 * eval.accuracy
    );

    let mut report = RunReport::new(
        "infer",
        ctx.seed,
        serde_json::json!({
            "mode": mode_name,
            "images": images,
            "model_path": model_path,
            "channel": channel_cfg,
            "energy": energy_cfg,
        }),
    );

    // Reference run: the quantized-ideal ground truth for score deltas.
    if mode != SimMode::Ideal {
        let reference = network::confusion_and_scores(
            &model,
            &inputs,
            &labels,
            SimMode::Ideal,
            &channel_cfg,
            &energy_cfg,
        )?;
        let diffs = network::diag_differences(&eval.scores, &reference.scores);
        let max_diff = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        println!(
            "vs ideal reference: accuracy {:.1}% -> {:.1}% (delta {:+.2} points), \
             max |diag score diff| {:.4}",
            100.0 * reference.accuracy,
            100.0 * eval.accuracy,
            100.0 * (eval.accuracy - reference.accuracy),
            max_diff
        );
        report.diag_differences = Some(diffs);
        report.set_metric("ideal_accuracy", reference.accuracy);
    }

    if eval.ber.total_bits > 0 {
        println!(
            "transmitted bit errors: {} / {} = {:.3e}",
            eval.ber.errors,
            eval.ber.total_bits,
            eval.ber.ber_total()
        );
    }
    let optical_fj = eval.tally.energy_optical_j * 1e15;
    let electrical_fj = eval.tally.energy_electrical_j * 1e15;
    println!(
        "interconnect energy for {} images: optical {:.3e} fJ, electrical {:.3e} fJ per-hop \
         / {:.3e} fJ single-bus ({} bits received, {:.3} fJ/bit optical)",
        eval.images,
        optical_fj,
        electrical_fj,
        eval.tally.energy_electrical_bus_j * 1e15,
        eval.tally.bits_received,
        energy::optical_energy_per_bit(&energy_cfg)? * 1e15,
    );
    println!(
        "time steps simulated: {} bit-serial (a spatially parallel 8-wide bus would take {})",
        eval.tally.steps,
        eval.tally.steps / 8
    );

    // CSV side artifacts for the two matrices.
    let confusion_csv = ctx.out_dir.join(format!("infer_{mode_name}_confusion.csv"));
    let mut csv = String::from("true_label,pred_0,pred_1,pred_2,pred_3,pred_4,pred_5,pred_6,pred_7,pred_8,pred_9\n");
    for (label, row) in eval.confusion.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        csv.push_str(&format!("{label},{}\n", cells.join(",")));
    }
    std::fs::write(&confusion_csv, csv)
        .map_err(|e| CliError::runtime(format!("cannot write {confusion_csv:?}: {e}")))?;

    let scores_csv = ctx.out_dir.join(format!("infer_{mode_name}_scores.csv"));
    let mut csv = String::from("class,true_0,true_1,true_2,true_3,true_4,true_5,true_6,true_7,true_8,true_9\n");
    for (class, row) in eval.scores.mean_scores.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        csv.push_str(&format!("{class},{}\n", cells.join(",")));
    }
    std::fs::write(&scores_csv, csv)
        .map_err(|e| CliError::runtime(format!("cannot write {scores_csv:?}: {e}")))?;

    report.accuracy = Some(eval.accuracy);
    report.energy = Some(eval.tally);
    report.ber = Some(eval.ber);
    report.confusion_matrix = Some(eval.confusion);
    report.output_scores = Some(eval.scores);
    report.stamp(t0.elapsed().as_secs_f64());
    let report_path = ctx.out_dir.join(format!("infer_{mode_name}_report.json"));
    write_report(&report, &report_path)?;
    println!("report written to {}", report_path.display());
    Ok(())
}
