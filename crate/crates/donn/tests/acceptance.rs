//! Acceptance suite: one test per release criterion, each printing a
//! `criterion N PASS` line with the measured values. Run with
//! `cargo test -p donn --test acceptance -- --nocapture` to see them.
//!
//! Criterion 9 needs the MNIST IDX files; point `DONN_MNIST_DIR` at them or
//! place them in `data/` at the workspace root (see README).

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use donn::ber::{self, BerConfig};
use donn::channel::{estimate_xtalk, measure_ber, Channel, ChannelConfig};
use donn::dataflow::{self, SimMode, SwitchingMode};
use donn::energy::{self, EnergyConfig, Scenario};
use donn::frame::{Axis, AxisSet, BitGrid};
use donn::matrix::Matrix;
use donn::mnist::{MnistSet, Split};
use donn::network::{self, Arch, TrainConfig};
use donn::quant::quantize;
use donn::report::RunReport;

const FF: f64 = 1e-15;

fn mnist_dir() -> PathBuf {
    if let Ok(dir) = std::env::var("DONN_MNIST_DIR") {
        return PathBuf::from(dir);
    }
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[test]
fn criterion_01_scenario_energy_table() {
    let base = EnergyConfig::default();
    let windows = [
        (Scenario::InterMacMin, 0.15, 0.20),
        (Scenario::InterMacMax, 0.25, 0.30),
        (Scenario::InterSram, 1.5, 2.1),
        (Scenario::InterChiplet, 85.0, 95.0),
    ];
    let mut measured = Vec::new();
    for (scenario, lo, hi) in windows {
        let cfg = scenario.apply(&base);
        let e_fj = energy::electrical_energy_per_bit(&cfg).unwrap() / FF;
        assert!(
            e_fj >= lo && e_fj <= hi,
            "{}: {e_fj:.4} fJ outside [{lo}, {hi}]",
            scenario.name()
        );
        measured.push(format!("{}={:.3} fJ", scenario.name(), e_fj));
    }
    let e_opt_fj = energy::optical_energy_per_bit(&base).unwrap() / FF;
    assert!(
        (0.17..=0.22).contains(&e_opt_fj),
        "optical {e_opt_fj:.4} fJ outside [0.17, 0.22]"
    );
    println!(
        "criterion 1 PASS: electrical {}, optical {:.3} fJ/bit",
        measured.join(", "),
        e_opt_fj
    );
}

#[test]
fn criterion_02_crossover_length() {
    let cfg = EnergyConfig::default();
    let analytic = energy::crossover_length(&cfg).unwrap();
    assert!(
        (4.0..=6.0).contains(&analytic),
        "crossover {analytic:.4} um outside [4, 6]"
    );

    // Independent bisection oracle on E_elec(L) - E_DONN.
    let e_opt = energy::optical_energy_per_bit(&cfg).unwrap();
    let f = |l: f64| {
        let mut c = cfg.clone();
        c.wire_length_um = l;
        energy::electrical_energy_per_bit(&c).unwrap() - e_opt
    };
    let (mut lo, mut hi) = (0.0_f64, 1e6_f64);
    assert!(f(lo) < 0.0 && f(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    assert!(
        (analytic - oracle).abs() < 1e-6,
        "analytic {analytic} vs bisection {oracle}"
    );
    println!(
        "criterion 2 PASS: crossover {analytic:.4} um, bisection agrees to {:.2e} um",
        (analytic - oracle).abs()
    );
}

#[test]
fn criterion_03_photon_budget() {
    let n_p = energy::photons_per_bit(&EnergyConfig::default()).unwrap();
    assert!(
        (990.0..=1010.0).contains(&n_p),
        "photons/bit {n_p:.2} outside [990, 1010]"
    );
    println!("criterion 3 PASS: photons/bit {n_p:.2}");
}

#[test]
fn criterion_04_ber_table_reproduction() {
    let c_total = 0.2e-15;
    let cfg = |n_p: f64, t: f64| BerConfig::new(n_p, t, c_total);

    let shot100 = ber::ber1_shot(&cfg(100.0, 300.0)).unwrap();
    assert!((1e-9..=1e-7).contains(&shot100), "shot(100) = {shot100:e}");

    let shot10 = ber::ber1_shot(&cfg(10.0, 300.0)).unwrap();
    assert!((1e-3..=1e-1).contains(&shot10), "shot(10) = {shot10:e}");

    let log_shot1000 =
        ber::ln_ber1_shot(&cfg(1000.0, 300.0)).unwrap() * std::f64::consts::LOG10_E;
    assert!(
        (-71.0..=-67.0).contains(&log_shot1000),
        "log10 shot(1000) = {log_shot1000:.2}"
    );

    for t in [300.0, 500.0] {
        let b0 = ber::ber0(&cfg(100.0, t)).unwrap();
        assert!(
            (1e-19..=1e-11).contains(&b0),
            "ber0(100, {t}) = {b0:e} outside [1e-19, 1e-11]"
        );
    }

    for t in [300.0, 500.0] {
        let total = ber::ber1_total(&cfg(100.0, t)).unwrap();
        assert!(
            (1e-7..=1e-4).contains(&total),
            "total(100, {t}) = {total:e} outside [1e-7, 1e-4]"
        );
    }
    println!(
        "criterion 4 PASS: shot(10)={shot10:.2e}, shot(100)={shot100:.2e}, \
         log10 shot(1000)={log_shot1000:.1}, ber0(100)@300K={:.2e}, total(100)@300K={:.2e}",
        ber::ber0(&cfg(100.0, 300.0)).unwrap(),
        ber::ber1_total(&cfg(100.0, 300.0)).unwrap()
    );
}

/// Run `trials` single-bit transmissions of the given bit value through the
/// channel (no crosstalk) and count errors.
fn monte_carlo_ber(cfg: &ChannelConfig, bit: u8, trials: u64) -> f64 {
    let channel = Channel::new(cfg.clone()).unwrap();
    let (rows, cols) = (1000, 1000);
    let per_frame = (rows * cols) as u64;
    let frames = trials / per_frame;
    let mut grid = BitGrid::zeros(rows, cols);
    if bit == 1 {
        grid = BitGrid::from_vec(rows, cols, vec![1; rows * cols]).unwrap();
    }
    let mut errors = 0u64;
    for f in 0..frames {
        let received = channel.transmit(&grid, f);
        let (stats, _) = measure_ber(&grid, &received).unwrap();
        errors += stats.errors;
    }
    errors as f64 / (frames * per_frame) as f64
}

#[test]
fn criterion_05_monte_carlo_matches_closed_forms() {
    let trials: u64 = 10_000_000;
    let c_total = 0.2e-15;
    let t = 300.0;
    let mut lines = Vec::new();
    for &n_p in &[10.0, 100.0] {
        let ch = ChannelConfig {
            photons_per_bit: n_p,
            temperature_k: t,
            c_total,
            xtalk_fraction: 0.0,
            enable_xtalk: false,
            seed: 2718,
            ..ChannelConfig::default()
        };
        let bc = BerConfig::new(n_p, t, c_total);

        // '1' errors against the exact decision-model closed form (the
        // published clipped sum excludes sub-zero charge, which is ~7% of
        // the mass at n_p = 10; see ber module docs).
        let analytic1 = ber::ber1_exact(&bc).unwrap();
        let measured1 = monte_carlo_ber(&ch, 1, trials);
        let se1 = (analytic1 * (1.0 - analytic1) / trials as f64).sqrt();
        assert!(
            (measured1 - analytic1).abs() <= 3.0 * se1,
            "BER1 n_p={n_p}: measured {measured1:e} vs analytic {analytic1:e} (3se = {:e})",
            3.0 * se1
        );

        // '0' errors against the erfc form (exact for the comparator).
        let analytic0 = ber::ber0(&bc).unwrap();
        let measured0 = monte_carlo_ber(&ch, 0, trials);
        let se0 = (analytic0 * (1.0 - analytic0) / trials as f64).sqrt();
        assert!(
            (measured0 - analytic0).abs() <= 3.0 * se0.max(1e-12),
            "BER0 n_p={n_p}: measured {measured0:e} vs analytic {analytic0:e}"
        );
        lines.push(format!(
            "n_p={n_p}: BER1 {measured1:.4e}~{analytic1:.4e}, BER0 {measured0:.4e}~{analytic0:.4e}"
        ));
    }
    println!(
        "criterion 5 PASS: 1e7-trial Monte Carlo within 3 binomial SE ({})",
        lines.join("; ")
    );
}

#[test]
fn criterion_06_noiseless_dataflow_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let channel = ChannelConfig::default().noiseless();
    let energy_cfg = EnergyConfig::default();
    let params = donn::quant::QuantParams {
        scale: 1.0,
        floating_min: 0.0,
        quantized_min: 0,
        num_bits: 8,
        degenerate_range: false,
    };
    for trial in 0..1000u64 {
        let b = rng.random_range(1..=8);
        let k = rng.random_range(1..=8);
        let n = rng.random_range(1..=8);
        let xm = Matrix::from_vec(
            b,
            k,
            (0..b * k).map(|_| rng.random_range(0..=255) as f64).collect(),
        )
        .unwrap();
        let wm = Matrix::from_vec(
            k,
            n,
            (0..k * n).map(|_| rng.random_range(0..=255) as f64).collect(),
        )
        .unwrap();
        let x = quantize(&xm, &params).unwrap();
        let w = quantize(&wm, &params).unwrap();
        let r = dataflow::bit_serial_gemm(&x, &w, SimMode::Ideal, &channel, &energy_cfg, 0)
            .unwrap();
        // Brute-force integer product oracle.
        for i in 0..b {
            for j in 0..n {
                let mut expect = 0i64;
                for kk in 0..k {
                    expect += x.get(i, kk) as i64 * w.get(kk, j) as i64;
                }
                assert_eq!(r.y_at(i, j), expect, "trial {trial} ({b}x{k}x{n})");
            }
        }
        assert_eq!(r.steps, 8 * k as u64, "step count");
    }
    println!("criterion 6 PASS: 1000 random GEMMs exact, step count = 8K");
}

#[test]
fn criterion_07_switching_factors() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let stream: Vec<u8> = (0..1_000_000)
        .map(|_| if rng.random_bool(0.5) { 1 } else { 0 })
        .collect();
    let elec = dataflow::empirical_switching_factor(&stream, SwitchingMode::Electrical).unwrap();
    let opt = dataflow::empirical_switching_factor(&stream, SwitchingMode::Optical).unwrap();
    assert!((elec - 0.25).abs() <= 0.005, "electrical factor {elec}");
    assert!((opt - 0.5).abs() <= 0.005, "optical factor {opt}");
    println!("criterion 7 PASS: 0->1 fraction {elec:.4}, ones fraction {opt:.4}");
}

#[test]
fn criterion_08_crosstalk_correction_efficacy() {
    let base = ChannelConfig {
        xtalk_fraction: 0.19,
        photons_per_bit: 1000.0,
        temperature_k: 300.0,
        seed: 808,
        ..ChannelConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let sent = BitGrid::random(350, 300, &mut rng); // 105k bits

    let without = Channel::new(base.clone()).unwrap();
    let (raw, _) = measure_ber(&sent, &without.transmit(&sent, 0)).unwrap();

    let with = Channel::new(ChannelConfig {
        correct_xtalk: true,
        ..base.clone()
    })
    .unwrap();
    let (fixed, _) = measure_ber(&sent, &with.transmit(&sent, 0)).unwrap();

    assert!(raw.errors > 0, "no errors without correction");
    let factor = if fixed.errors == 0 {
        f64::INFINITY
    } else {
        raw.ber_total() / fixed.ber_total()
    };
    assert!(factor >= 10.0, "improvement factor {factor}");

    // Crosstalk estimation round trip under full noise, single-axis
    // calibration.
    let calib_cfg = ChannelConfig {
        xtalk_axes: AxisSet::Rows,
        ..base
    };
    let channel = Channel::new(calib_cfg.clone()).unwrap();
    let calib = BitGrid::alternating(128, 65, Axis::Row);
    let mut normalized = channel.transmit_intensities(&calib, 99);
    for v in normalized.data_mut() {
        *v /= calib_cfg.photons_per_bit;
    }
    let estimate = estimate_xtalk(&normalized, &calib, Axis::Row).unwrap();
    assert!(
        (estimate - 0.19).abs() <= 0.01,
        "xi estimate {estimate} not within 0.01 of 0.19"
    );

    let factor_str = if factor.is_infinite() {
        format!(">= {} (zero errors after correction)", raw.errors)
    } else {
        format!("{factor:.1}")
    };
    println!(
        "criterion 8 PASS: BER {:.3e} -> {:.3e}, improvement factor {}, xi estimate {:.4}",
        raw.ber_total(),
        fixed.ber_total(),
        factor_str,
        estimate
    );
}

#[test]
fn criterion_09_mnist_end_to_end() {
    let dir = mnist_dir();
    let train_set = MnistSet::load(&dir, Split::Train, None).unwrap_or_else(|e| {
        panic!(
            "MNIST IDX files not found in {dir:?} ({e}); set DONN_MNIST_DIR or see README data \
             section"
        )
    });
    let test_set = MnistSet::load(&dir, Split::Test, Some(500)).unwrap();
    let (train_x, train_y) = network::preprocess_set(&train_set).unwrap();
    let (test_x, test_y) = network::preprocess_set(&test_set).unwrap();

    let cfg = TrainConfig::default();
    let model = network::train(&train_x, &train_y, Arch::ThreeLayer, &cfg, 7).unwrap();

    let energy_cfg = EnergyConfig::default();
    let ideal_channel = ChannelConfig::default().noiseless();
    let ideal = network::confusion_and_scores(
        &model,
        &test_x,
        &test_y,
        SimMode::Ideal,
        &ideal_channel,
        &energy_cfg,
    )
    .unwrap();
    assert!(
        ideal.accuracy >= 0.94,
        "ideal-mode accuracy {:.3} below 0.94",
        ideal.accuracy
    );

    let noisy_channel = ChannelConfig {
        xtalk_fraction: 0.19,
        photons_per_bit: 1000.0,
        temperature_k: 300.0,
        seed: 909,
        ..ChannelConfig::default()
    };
    let optical = network::confusion_and_scores(
        &model,
        &test_x,
        &test_y,
        SimMode::Optical,
        &noisy_channel,
        &energy_cfg,
    )
    .unwrap();
    let drop = ideal.accuracy - optical.accuracy;
    assert!(
        drop <= 0.015,
        "optical accuracy drop {:.4} exceeds 1.5 points (ideal {:.3}, optical {:.3})",
        drop,
        ideal.accuracy,
        optical.accuracy
    );

    let diffs = network::diag_differences(&optical.scores, &ideal.scores);
    for (class, d) in diffs.iter().enumerate() {
        assert!(
            d.abs() < 0.05,
            "class {class}: mean diagonal score difference {d:.4} >= 0.05"
        );
    }
    let max_diff = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    println!(
        "criterion 9 PASS: ideal {:.1}%, optical {:.1}% (drop {:.2} pts), max |diag diff| {:.4}",
        100.0 * ideal.accuracy,
        100.0 * optical.accuracy,
        100.0 * drop,
        max_diff
    );
}

#[test]
fn criterion_10_gradient_check() {
    // Toy network; central differences on every parameter of the loss.
    let dims = [4, 5, 3];
    let mut model = donn::network::FcnnModel::new_seeded(&dims, 42).unwrap();
    let inputs = vec![
        (vec![0.31, -0.74, 0.52, 0.89], 2u8),
        (vec![-0.11, 0.45, -0.66, 0.12], 0u8),
    ];
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    let loss_of = |m: &donn::network::FcnnModel, xs: &[(Vec<f64>, u8)]| {
        let inputs: Vec<Vec<f64>> = xs.iter().map(|p| p.0.clone()).collect();
        let labels: Vec<u8> = xs.iter().map(|p| p.1).collect();
        network::mean_cross_entropy(m, &inputs, &labels).unwrap()
    };
    // Analytic gradients of the mean loss from backprop, normalized by the
    // sample count to match mean_cross_entropy.
    let base_grads = {
        let mut grads = network::loss_gradients(&model, &inputs).unwrap();
        for g in grads.iter_mut() {
            for v in g.0.data_mut() {
                *v /= inputs.len() as f64;
            }
            for v in g.1.iter_mut() {
                *v /= inputs.len() as f64;
            }
        }
        grads
    };
    for l in 0..model.layers.len() {
        for idx in 0..model.layers[l].weights.data().len() {
            let orig = model.layers[l].weights.data()[idx];
            model.layers[l].weights.data_mut()[idx] = orig + eps;
            let up = loss_of(&model, &inputs);
            model.layers[l].weights.data_mut()[idx] = orig - eps;
            let down = loss_of(&model, &inputs);
            model.layers[l].weights.data_mut()[idx] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let analytic = base_grads[l].0.data()[idx];
            let denom = numeric.abs().max(analytic.abs()).max(1e-8);
            let rel = ((numeric - analytic) / denom).abs();
            worst = worst.max(rel);
            assert!(rel < 1e-4, "layer {l} weight {idx}: rel err {rel:e}");
        }
    }
    println!("criterion 10 PASS: worst relative gradient error {worst:.2e}");
}

#[test]
fn criterion_11_deterministic_reports() {
    // Two full runs with an identical resolved config must serialize to
    // byte-identical reports once timestamps are cleared.
    let dir = mnist_dir();
    let run = || {
        let test_set = MnistSet::load(&dir, Split::Test, Some(20)).unwrap();
        let (test_x, test_y) = network::preprocess_set(&test_set).unwrap();
        let model = network::train(
            &test_x,
            &test_y,
            Arch::TwoLayer,
            &TrainConfig {
                epochs: 2,
                ..TrainConfig::default()
            },
            11,
        )
        .unwrap();
        let channel = ChannelConfig {
            seed: 1111,
            ..ChannelConfig::default()
        };
        let energy_cfg = EnergyConfig::default();
        let eval = network::confusion_and_scores(
            &model,
            &test_x,
            &test_y,
            SimMode::Optical,
            &channel,
            &energy_cfg,
        )
        .unwrap();
        let mut report = RunReport::new(
            "acceptance-determinism",
            channel.seed,
            serde_json::json!({ "channel": channel, "energy": energy_cfg }),
        );
        report.stamp(0.0);
        report.accuracy = Some(eval.accuracy);
        report.energy = Some(eval.tally);
        report.ber = Some(eval.ber);
        report.confusion_matrix = Some(eval.confusion);
        report.output_scores = Some(eval.scores);
        report
    };
    let a = run();
    let b = run();
    let a_bytes = serde_json::to_vec(&a.without_timestamps()).unwrap();
    let b_bytes = serde_json::to_vec(&b.without_timestamps()).unwrap();
    assert_eq!(a_bytes, b_bytes, "reports differ between identical runs");
    println!(
        "criterion 11 PASS: byte-identical reports ({} bytes) modulo timestamps",
        a_bytes.len()
    );
}
