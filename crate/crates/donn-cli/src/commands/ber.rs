//! `donn ber`: the analytic BER grid and Monte-Carlo validation.

use donn::ber::{self, ber_table, ber_table_to_csv, ber_table_to_text, BerConfig};
use donn::channel::{measure_ber, Channel};
use donn::frame::BitGrid;
use donn::report::{write_report, RunReport};

use super::Context;
use crate::CliError;

#[allow(clippy::too_many_arguments)]
pub fn run(
    ctx: &Context,
    table: bool,
    montecarlo: bool,
    np: Option<f64>,
    trials_str: &str,
    temp: Option<f64>,
    np_list: &[f64],
    temps: &[f64],
) -> Result<(), CliError> {
    if !table && !montecarlo {
        return Err(CliError::usage(
            "nothing to do: pass --table and/or --montecarlo (see --help)",
        ));
    }
    let channel_cfg = ctx.file_cfg.channel_config(ctx.seed)?;
    let base = BerConfig::new(
        channel_cfg.photons_per_bit,
        channel_cfg.temperature_k,
        channel_cfg.c_total,
    );
    let t0 = std::time::Instant::now();
    let mut report = RunReport::new(
        "ber",
        ctx.seed,
        serde_json::json!({ "channel": channel_cfg, "np_list": np_list, "temps": temps }),
    );

    if table {
        let rows = ber_table(np_list, temps, &base)?;
        print!("{}", ber_table_to_text(&rows));
        let path = ctx.out_dir.join("ber_table.csv");
        std::fs::write(&path, ber_table_to_csv(&rows))
            .map_err(|e| CliError::runtime(format!("cannot write {path:?}: {e}")))?;
        println!("table written to {}", path.display());
    }

    if montecarlo {
        let n_p = np.ok_or_else(|| CliError::usage("--montecarlo needs --np <photons>"))?;
        let trials_f: f64 = trials_str
            .parse()
            .map_err(|_| CliError::usage(format!("cannot parse --trials '{trials_str}'")))?;
        if !(trials_f >= 1.0) {
            return Err(CliError::usage("--trials must be >= 1"));
        }
        let trials = trials_f as u64;
        let temperature = temp.unwrap_or(base.temperature_k);

        let mut mc_cfg = channel_cfg.clone();
        mc_cfg.photons_per_bit = n_p;
        mc_cfg.temperature_k = temperature;
        mc_cfg.xtalk_fraction = 0.0;
        mc_cfg.enable_xtalk = false;
        mc_cfg.correct_xtalk = false;
        let bc = BerConfig::new(n_p, temperature, mc_cfg.c_total);

        let analytic0 = ber::ber0(&bc)?;
        let analytic1 = ber::ber1_exact(&bc)?;
        let analytic1_paper = ber::ber1_total(&bc)?;

        // Warn when the trial budget cannot resolve the predicted rate.
        for (name, p) in [("BER0", analytic0), ("BER1", analytic1)] {
            if p > 0.0 && (trials as f64) * p < 10.0 {
                eprintln!(
                    "warning: {name} ~ {p:.2e} needs >= {:.1e} trials for ~10 expected errors; \
                     got {trials:.1e}",
                    10.0 / p,
                    trials = trials as f64
                );
            }
        }

        let channel = Channel::new(mc_cfg.clone())?;
        let (rows, cols) = (1000usize, 1000usize);
        let per_frame = (rows * cols) as u64;
        let frames = (trials / per_frame).max(1);
        let actual_trials = frames * per_frame;

        let mut results = Vec::new();
        for (bit, analytic) in [(1u8, analytic1), (0u8, analytic0)] {
            let grid = BitGrid::from_vec(rows, cols, vec![bit; rows * cols]).unwrap();
            let mut errors = 0u64;
            for f in 0..frames {
                let received = channel.transmit(&grid, (bit as u64) * frames + f);
                let (stats, _) = measure_ber(&grid, &received)?;
                errors += stats.errors;
            }
            let measured = errors as f64 / actual_trials as f64;
            let se = (measured * (1.0 - measured) / actual_trials as f64)
                .sqrt()
                .max(1.0 / actual_trials as f64);
            let ci = 1.96 * se;
            println!(
                "BER{bit}: measured {measured:.4e} +/- {ci:.2e} (95% CI), analytic {analytic:.4e}"
            );
            results.push((bit, measured, ci, analytic));
        }
        println!(
            "note: analytic BER1 above is the exact threshold-detector form; the published \
             clipped sum gives {analytic1_paper:.4e}"
        );
        report.set_metric("mc_trials", actual_trials as f64);
        for (bit, measured, ci, analytic) in results {
            report.set_metric(&format!("mc_ber{bit}_measured"), measured);
            report.set_metric(&format!("mc_ber{bit}_ci95"), ci);
            report.set_metric(&format!("mc_ber{bit}_analytic"), analytic);
        }
    }

    report.stamp(t0.elapsed().as_secs_f64());
    write_report(&report, &ctx.out_dir.join("ber_report.json"))?;
    Ok(())
}
