//! `donn energy`: scenario presets, length sweeps, crossover.

use std::collections::BTreeMap;

use donn::energy::{
    self, crossover_length, format_fj, scenario_report, sweep_energy, sweep_to_csv, Scenario,
};
use donn::report::{write_report, RunReport};

use super::Context;
use crate::CliError;

/// Parse `START:END:lin|log[:STEPS]` into a length list.
fn parse_sweep(spec: &str) -> Result<Vec<f64>, CliError> {
    let usage =
        || CliError::usage(format!("malformed sweep '{spec}'; expected START:END:lin|log[:STEPS], e.g. 1:3000:log"));
    let parts: Vec<&str> = spec.split(':').collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(usage());
    }
    let start: f64 = parts[0].parse().map_err(|_| usage())?;
    let end: f64 = parts[1].parse().map_err(|_| usage())?;
    let steps: usize = if parts.len() == 4 {
        parts[3].parse().map_err(|_| usage())?
    } else {
        60
    };
    if !(start > 0.0) || end < start || steps == 0 {
        return Err(usage());
    }
    if start == end {
        return Ok(vec![start]);
    }
    let n = steps.max(2);
    let lengths = match parts[2] {
        "lin" => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
        "log" => {
            let (ls, le) = (start.ln(), end.ln());
            (0..n)
                .map(|i| (ls + (le - ls) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
        _ => return Err(usage()),
    };
    Ok(lengths)
}

pub fn run(
    ctx: &Context,
    preset: Option<&str>,
    sweep: Option<&str>,
    gnuplot: bool,
) -> Result<(), CliError> {
    let base = ctx.file_cfg.energy_config();
    let mut report = RunReport::new(
        "energy",
        ctx.seed,
        serde_json::json!({ "energy": base }),
    );
    let t0 = std::time::Instant::now();

    let run_presets = preset.is_some() || sweep.is_none();
    if run_presets {
        let selected: Vec<Scenario> = match preset {
            None | Some("all") => Scenario::ALL.to_vec(),
            Some(name) => vec![Scenario::from_name(name).ok_or_else(|| {
                CliError::usage(format!(
                    "unknown preset '{name}'; expected all, inter_mac_min, inter_mac_max, \
                     inter_sram or inter_chiplet"
                ))
            })?],
        };
        println!(
            "{:<16} {:>10} {:>8} {:>14} {:>14}",
            "scenario", "L_wire/um", "V_dd/V", "E_elec fJ/bit", "E_DONN fJ/bit"
        );
        let mut json_map = BTreeMap::new();
        for scenario in selected {
            let r = scenario_report(scenario, &base)?;
            println!(
                "{:<16} {:>10} {:>8} {:>14} {:>14}",
                scenario.name(),
                r.wire_length_um,
                r.v_dd,
                format_fj(r.e_elec),
                format_fj(r.e_donn)
            );
            json_map.insert(scenario.name().to_string(), r);
        }
        let path = ctx.out_dir.join("energy_presets.json");
        std::fs::write(&path, serde_json::to_string_pretty(&json_map).unwrap())
            .map_err(|e| CliError::runtime(format!("cannot write {path:?}: {e}")))?;
        println!("presets written to {}", path.display());
    }

    if let Some(spec) = sweep {
        let lengths = parse_sweep(spec)?;
        let rows = sweep_energy(&base, &lengths)?;
        let csv_path = ctx.out_dir.join("energy_sweep.csv");
        std::fs::write(&csv_path, sweep_to_csv(&rows))
            .map_err(|e| CliError::runtime(format!("cannot write {csv_path:?}: {e}")))?;
        println!("sweep ({} points) written to {}", rows.len(), csv_path.display());
        if gnuplot {
            let gp_path = ctx.out_dir.join("energy_sweep.gp");
            let script = "set logscale xy\n\
                          set xlabel 'wire length / um'\n\
                          set ylabel 'energy per bit / fJ'\n\
                          set datafile separator ','\n\
                          plot 'energy_sweep.csv' using 1:2 skip 1 with lines title 'electrical', \\\n\
                          \x20    'energy_sweep.csv' using 1:3 skip 1 with lines title 'optical'\n";
            std::fs::write(&gp_path, script)
                .map_err(|e| CliError::runtime(format!("cannot write {gp_path:?}: {e}")))?;
            println!("gnuplot script written to {}", gp_path.display());
        }
    }

    let crossover = crossover_length(&base)?;
    println!(
        "crossover: optical beats the wire for L_wire >= {crossover:.2} um \
         (E_DONN = {} fJ/bit)",
        format_fj(energy::optical_energy_per_bit(&base)?)
    );
    report.set_metric("crossover_um", crossover);
    report.stamp(t0.elapsed().as_secs_f64());
    write_report(&report, &ctx.out_dir.join("energy_report.json"))?;
    Ok(())
}
