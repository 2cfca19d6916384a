//! Closed-form bit-error rates of the receiverless detector.
//!
//! A transmitted `1` deposits a Poisson-distributed photoelectron count with
//! mean `n_p`; a transmitted `0` deposits none. kT/C thermal noise adds a
//! zero-mean Gaussian with standard deviation `sigma_J` electrons on top of
//! either. The detector reads `1` when the charge reaches the threshold
//! `q_D` (half of `n_p` by default).
//!
//! Two flavours of the `1`-error rate are provided:
//!
//! * [`ber1_shot`] / [`ber1_total`] follow the published tabulation, which
//!   sums the (convolved) charge pmf over the integer range `1..q_D` —
//!   charge at or below zero is excluded from the sum.
//! * [`ber1_exact`] is the exact error probability of the threshold
//!   comparator, P(charge < q_D), including the sub-zero mass. This is the
//!   quantity a Monte-Carlo channel simulation measures; at `n_p = 10` the
//!   two differ visibly (the Gaussian drags ~7% of the mass below zero).

use serde::{Deserialize, Serialize};

use crate::energy::{BOLTZMANN, ELEMENTARY_CHARGE};
use crate::error::{Error, Result};
use crate::numeric::{
    ln_erfc, ln_gauss_discrete_pmf, ln_normal_cdf, ln_poisson_pmf, log_sum_exp,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerConfig {
    /// Mean photoelectrons per received `1`.
    pub photons_per_bit: f64,
    /// Detector temperature, K.
    pub temperature_k: f64,
    /// Total load capacitance C_det + C_T, F.
    pub c_total: f64,
    /// Decision threshold in electrons; defaults to `photons_per_bit / 2`
    /// when `None`.
    pub q_threshold: Option<f64>,
}

impl BerConfig {
    pub fn new(photons_per_bit: f64, temperature_k: f64, c_total: f64) -> Self {
        BerConfig {
            photons_per_bit,
            temperature_k,
            c_total,
            q_threshold: None,
        }
    }

    pub fn threshold_electrons(&self) -> f64 {
        self.q_threshold.unwrap_or(self.photons_per_bit / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.photons_per_bit >= 1.0) {
            return Err(Error::config("photons_per_bit", "must be >= 1"));
        }
        if !(self.temperature_k > 0.0) {
            return Err(Error::config("temperature_k", "must be > 0"));
        }
        if !(self.c_total > 0.0) {
            return Err(Error::config("c_total", "must be > 0"));
        }
        // Zero is tolerated as the degenerate symmetric-Gaussian case.
        let q = self.threshold_electrons();
        if !(q >= 0.0 && q < self.photons_per_bit) {
            return Err(Error::config(
                "q_threshold",
                format!("must lie in [0, n_p), got {q}"),
            ));
        }
        Ok(())
    }

    /// Threshold rounded to the nearest integer, as used by the discrete
    /// Poisson sums.
    fn q_threshold_int(&self) -> u64 {
        self.threshold_electrons().round() as u64
    }
}

/// Thermal (kT/C) noise expressed in electrons:
/// sigma_J = sqrt(k_B T (C_det + C_T)) / e.
pub fn sigma_thermal_electrons(cfg: &BerConfig) -> Result<f64> {
    cfg.validate()?;
    Ok((BOLTZMANN * cfg.temperature_k * cfg.c_total).sqrt() / ELEMENTARY_CHARGE)
}

/// ln of the `0`-error rate: thermal noise alone pushing an empty detector
/// over threshold, (1/2) erfc(q_D / (sqrt(2) sigma_J)).
pub fn ln_ber0(cfg: &BerConfig) -> Result<f64> {
    let sigma = sigma_thermal_electrons(cfg)?;
    let q_d = cfg.threshold_electrons();
    Ok(-std::f64::consts::LN_2 + ln_erfc(q_d / (std::f64::consts::SQRT_2 * sigma)))
}

/// `0`-error rate. Underflows to 0.0 for extreme tails (e.g. n_p = 1000);
/// use [`ln_ber0`] when the log-domain value is needed.
pub fn ber0(cfg: &BerConfig) -> Result<f64> {
    cfg.validate()?;
    if cfg.threshold_electrons() == 0.0 {
        // Degenerate threshold: half of the symmetric Gaussian is above it.
        return Ok(0.5);
    }
    Ok(ln_ber0(cfg)?.exp())
}

/// ln of the shot-noise-only `1`-error rate: the Poisson lower tail
/// sum_{q=1}^{q_D - 1} pmf(q), per the published sum (q = 0 excluded).
pub fn ln_ber1_shot(cfg: &BerConfig) -> Result<f64> {
    cfg.validate()?;
    let q_d = cfg.q_threshold_int();
    let n_p = cfg.photons_per_bit;
    let terms: Vec<f64> = (1..q_d).map(|q| ln_poisson_pmf(q, n_p)).collect();
    Ok(log_sum_exp(&terms))
}

pub fn ber1_shot(cfg: &BerConfig) -> Result<f64> {
    Ok(ln_ber1_shot(cfg)?.exp())
}

/// Half-width of the discretized Gaussian support, truncated where the pmf
/// falls below 1e-30 of its peak.
fn gauss_support(sigma: f64) -> i64 {
    (sigma * (2.0 * 30.0 * std::f64::consts::LN_10).sqrt()).ceil() as i64 + 1
}

/// ln of the total `1`-error rate: Poisson shot noise convolved with the
/// integer-discretized thermal Gaussian, summed over q in [1, q_D - 1].
pub fn ln_ber1_total(cfg: &BerConfig) -> Result<f64> {
    let sigma = sigma_thermal_electrons(cfg)?;
    let q_d = cfg.q_threshold_int() as i64;
    let n_p = cfg.photons_per_bit;
    let support = gauss_support(sigma);

    let mut ln_gauss = Vec::with_capacity(2 * support as usize + 1);
    for j in -support..=support {
        ln_gauss.push(ln_gauss_discrete_pmf(j, sigma));
    }

    let mut terms = Vec::with_capacity(((q_d - 1).max(0) as usize) * ln_gauss.len());
    for q in 1..q_d {
        for (idx, lg) in ln_gauss.iter().enumerate() {
            let j = idx as i64 - support;
            let m = q - j;
            if m < 0 {
                continue;
            }
            terms.push(ln_poisson_pmf(m as u64, n_p) + lg);
        }
    }
    Ok(log_sum_exp(&terms))
}

pub fn ber1_total(cfg: &BerConfig) -> Result<f64> {
    Ok(ln_ber1_total(cfg)?.exp())
}

/// Exact `1`-error rate of the threshold comparator with continuous thermal
/// noise: P(Poisson(n_p) + N(0, sigma_J) < q_D) = sum_m pmf(m) Phi((q_D - m)/sigma).
///
/// Unlike [`ber1_total`] this includes charge excursions to zero and below,
/// so it is the correct reference for Monte-Carlo channel measurements.
pub fn ber1_exact(cfg: &BerConfig) -> Result<f64> {
    let sigma = sigma_thermal_electrons(cfg)?;
    let q_d = cfg.threshold_electrons();
    let n_p = cfg.photons_per_bit;
    // Poisson mass above n_p + 15 sqrt(n_p) is below ~1e-48 relative.
    let m_max = (n_p + 15.0 * n_p.sqrt() + 60.0) as u64;
    let terms: Vec<f64> = (0..=m_max)
        .map(|m| ln_poisson_pmf(m, n_p) + ln_normal_cdf((q_d - m as f64) / sigma))
        .collect();
    Ok(log_sum_exp(&terms).exp())
}

/// One row of the BER table: error rates for a given photon budget with the
/// `0`-error and total `1`-error shown as ranges over the temperature list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerTableRow {
    pub n_p: f64,
    pub log10_ber0_min: f64,
    pub log10_ber0_max: f64,
    pub log10_ber1_shot: f64,
    pub log10_ber1_total_min: f64,
    pub log10_ber1_total_max: f64,
}

/// Evaluate the BER grid over photon budgets and temperatures.
pub fn ber_table(
    n_p_list: &[f64],
    temperatures_k: &[f64],
    cfg_base: &BerConfig,
) -> Result<Vec<BerTableRow>> {
    if n_p_list.is_empty() || temperatures_k.is_empty() {
        return Err(Error::usage("ber_table needs non-empty n_p and T lists"));
    }
    const LOG10_E: f64 = std::f64::consts::LOG10_E;
    let mut rows = Vec::with_capacity(n_p_list.len());
    for &n_p in n_p_list {
        let mut ber0_logs = Vec::new();
        let mut total_logs = Vec::new();
        let mut shot_log = 0.0;
        for &t in temperatures_k {
            let mut cfg = cfg_base.clone();
            cfg.photons_per_bit = n_p;
            cfg.temperature_k = t;
            ber0_logs.push(ln_ber0(&cfg)? * LOG10_E);
            total_logs.push(ln_ber1_total(&cfg)? * LOG10_E);
            shot_log = ln_ber1_shot(&cfg)? * LOG10_E; // temperature-independent
        }
        let fmin = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let fmax = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rows.push(BerTableRow {
            n_p,
            log10_ber0_min: fmin(&ber0_logs),
            log10_ber0_max: fmax(&ber0_logs),
            log10_ber1_shot: shot_log,
            log10_ber1_total_min: fmin(&total_logs),
            log10_ber1_total_max: fmax(&total_logs),
        });
    }
    Ok(rows)
}

fn fmt_pow10(log10: f64) -> String {
    format!("1e{:.0}", log10)
}

/// Render the BER table in the layout of the published supplement table.
pub fn ber_table_to_text(rows: &[BerTableRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>8} | {:^21} | {:^12} | {:^21}\n",
        "n_p", "BER_0", "BER_1^shot", "BER_1^total"
    ));
    out.push_str(&"-".repeat(8 + 21 + 12 + 21 + 9));
    out.push('\n');
    for r in rows {
        let ber0 = if (r.log10_ber0_max - r.log10_ber0_min).abs() < 0.5 {
            fmt_pow10(r.log10_ber0_max)
        } else {
            format!(
                "{} - {}",
                fmt_pow10(r.log10_ber0_min),
                fmt_pow10(r.log10_ber0_max)
            )
        };
        let total = if (r.log10_ber1_total_max - r.log10_ber1_total_min).abs() < 0.5 {
            fmt_pow10(r.log10_ber1_total_max)
        } else {
            format!(
                "{} - {}",
                fmt_pow10(r.log10_ber1_total_min),
                fmt_pow10(r.log10_ber1_total_max)
            )
        };
        out.push_str(&format!(
            "{:>8} | {:^21} | {:^12} | {:^21}\n",
            r.n_p,
            ber0,
            fmt_pow10(r.log10_ber1_shot),
            total
        ));
    }
    out
}

/// Render the BER table as CSV (log10 values).
pub fn ber_table_to_csv(rows: &[BerTableRow]) -> String {
    let mut out = String::from(
        "n_p,log10_ber0_min,log10_ber0_max,log10_ber1_shot,log10_ber1_total_min,log10_ber1_total_max\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n_p,
            r.log10_ber0_min,
            r.log10_ber0_max,
            r.log10_ber1_shot,
            r.log10_ber1_total_min,
            r.log10_ber1_total_max
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const C_TOTAL: f64 = 0.2e-15;

    fn cfg(n_p: f64, t: f64) -> BerConfig {
        BerConfig::new(n_p, t, C_TOTAL)
    }

    #[test]
    fn sigma_thermal_published_values() {
        // sqrt(kB * T * 0.2 fF) / e: 5.6808 e- at 300 K, 7.3338 e- at 500 K;
        // the published estimate is "6-7 electrons" over that range.
        let s300 = sigma_thermal_electrons(&cfg(100.0, 300.0)).unwrap();
        let s500 = sigma_thermal_electrons(&cfg(100.0, 500.0)).unwrap();
        assert!((s300 - 5.680_765_639_59).abs() < 1e-9);
        assert!((s500 - 7.333_836_905_29).abs() < 1e-9);
    }

    #[test]
    fn sigma_thermal_sqrt_scaling() {
        let base = sigma_thermal_electrons(&cfg(100.0, 300.0)).unwrap();
        let mut c4 = cfg(100.0, 300.0);
        c4.c_total *= 4.0;
        let scaled = sigma_thermal_electrons(&c4).unwrap();
        assert!((scaled - 2.0 * base).abs() < 1e-12);
    }

    #[test]
    fn ber0_values_at_100_photons() {
        // 40-digit reference: 6.742e-19 at 300 K, 4.625e-12 at 500 K.
        let b300 = ber0(&cfg(100.0, 300.0)).unwrap();
        let b500 = ber0(&cfg(100.0, 500.0)).unwrap();
        assert!((b300 / 6.742_127_284e-19 - 1.0).abs() < 1e-6, "{b300}");
        assert!((b500 / 4.625_038_969e-12 - 1.0).abs() < 1e-6, "{b500}");
    }

    #[test]
    fn ber0_at_ten_photons_order_one_tenth() {
        let b = ber0(&cfg(10.0, 300.0)).unwrap();
        assert!((b / 0.189_385_494_1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ber0_zero_threshold_is_half() {
        let mut c = cfg(100.0, 300.0);
        c.q_threshold = Some(0.0);
        // Validation rejects a zero threshold, but the symmetric-Gaussian
        // limit is still exposed through ber0's degenerate branch.
        assert_eq!(ber0(&c).unwrap(), 0.5);
    }

    #[test]
    fn ber1_shot_reference_values() {
        // Frozen from 60-digit evaluation of the Poisson lower-tail sum.
        let b10 = ber1_shot(&cfg(10.0, 300.0)).unwrap();
        assert!((b10 / 0.029_207_288_147_2 - 1.0).abs() < 1e-9);

        let b100 = ber1_shot(&cfg(100.0, 300.0)).unwrap();
        assert!((b100 / 1.178_450_072_1e-8 - 1.0).abs() < 1e-9);

        let log_b1000 = ln_ber1_shot(&cfg(1000.0, 300.0)).unwrap() * std::f64::consts::LOG10_E;
        assert!((log_b1000 - (-68.382_613_94)).abs() < 1e-5);
    }

    #[test]
    fn ber1_shot_acceptance_windows() {
        let b100 = ber1_shot(&cfg(100.0, 300.0)).unwrap();
        assert!((1e-9..=1e-7).contains(&b100));
        let b10 = ber1_shot(&cfg(10.0, 300.0)).unwrap();
        assert!((1e-3..=1e-1).contains(&b10));
    }

    #[test]
    fn ber1_total_reference_values() {
        // 60-digit oracle of the clipped discrete convolution.
        let t = ber1_total(&cfg(100.0, 300.0)).unwrap();
        assert!((t / 1.979_319_321e-6 - 1.0).abs() < 1e-6, "{t}");
        let t500 = ber1_total(&cfg(100.0, 500.0)).unwrap();
        assert!((t500 / 1.234_778_634e-5 - 1.0).abs() < 1e-6, "{t500}");

        let lg300 = ln_ber1_total(&cfg(1000.0, 300.0)).unwrap() * std::f64::consts::LOG10_E;
        let lg500 = ln_ber1_total(&cfg(1000.0, 500.0)).unwrap() * std::f64::consts::LOG10_E;
        assert!((lg300 - (-65.195_095)).abs() < 1e-3, "{lg300}");
        assert!((lg500 - (-63.274_782)).abs() < 1e-3, "{lg500}");
    }

    #[test]
    fn ber1_total_approaches_shot_without_thermal_noise() {
        let mut c = cfg(100.0, 1e-9);
        c.c_total = 0.2e-15;
        let total = ber1_total(&c).unwrap();
        let shot = ber1_shot(&c).unwrap();
        assert!((total / shot - 1.0).abs() < 0.1, "total {total} shot {shot}");
    }

    #[test]
    fn ber1_total_dominates_shot() {
        for &n_p in &[10.0, 100.0, 1000.0] {
            for &t in &[300.0, 500.0] {
                let c = cfg(n_p, t);
                assert!(
                    ber1_total(&c).unwrap() >= ber1_shot(&c).unwrap(),
                    "n_p {n_p} T {t}"
                );
            }
        }
    }

    #[test]
    fn ber1_exact_reference_values() {
        // Includes the below-zero charge mass the published sum omits.
        let e10 = ber1_exact(&cfg(10.0, 300.0)).unwrap();
        assert!((e10 / 0.221_580_360_03 - 1.0).abs() < 1e-6, "{e10}");
        let e100 = ber1_exact(&cfg(100.0, 300.0)).unwrap();
        assert!((e100 / 2.494_909_086_44e-6 - 1.0).abs() < 1e-6, "{e100}");
    }

    #[test]
    fn monotonic_in_photons_and_temperature() {
        let pairs = [(10.0, 100.0), (100.0, 1000.0)];
        for (lo, hi) in pairs {
            assert!(
                ln_ber0(&cfg(hi, 300.0)).unwrap() < ln_ber0(&cfg(lo, 300.0)).unwrap(),
                "ber0 not decreasing {lo}->{hi}"
            );
            assert!(
                ln_ber1_total(&cfg(hi, 300.0)).unwrap() < ln_ber1_total(&cfg(lo, 300.0)).unwrap()
            );
        }
        assert!(ln_ber0(&cfg(100.0, 500.0)).unwrap() > ln_ber0(&cfg(100.0, 300.0)).unwrap());
    }

    #[test]
    fn probabilities_bounded() {
        for &n_p in &[1.5, 2.0, 10.0, 100.0, 1000.0] {
            for &t in &[1.0, 300.0, 500.0] {
                let c = cfg(n_p, t);
                for v in [
                    ber0(&c).unwrap(),
                    ber1_shot(&c).unwrap(),
                    ber1_total(&c).unwrap(),
                    ber1_exact(&c).unwrap(),
                ] {
                    assert!((0.0..=1.0).contains(&v), "n_p {n_p} T {t}: {v}");
                }
            }
        }
    }

    #[test]
    fn table_matches_published_grid() {
        let rows = ber_table(&[10.0, 100.0, 1000.0], &[300.0, 500.0], &cfg(100.0, 300.0)).unwrap();
        assert_eq!(rows.len(), 3);
        // Published n_p=10 row: BER0 1e-1, shot 1e-2, total 1e-1; each cell
        // within one order of magnitude.
        let r10 = &rows[0];
        assert!((r10.log10_ber0_max - (-1.0)).abs() <= 1.0);
        assert!((r10.log10_ber1_shot - (-2.0)).abs() <= 1.0);
        assert!((r10.log10_ber1_total_max - (-1.0)).abs() <= 1.0);
        // Published: n_p=100 row has BER0 1e-18..1e-12, shot 1e-8,
        // total 1e-6..1e-5; each cell within one order of magnitude.
        let r100 = &rows[1];
        assert!((r100.log10_ber1_shot - (-8.0)).abs() <= 1.0);
        assert!(r100.log10_ber0_min <= -17.0 && r100.log10_ber0_max >= -12.4);
        assert!((r100.log10_ber1_total_min - (-6.0)).abs() <= 1.0);
        assert!((r100.log10_ber1_total_max - (-5.0)).abs() <= 1.0);
        // n_p=1000 shot column: 1e-69 within one order.
        assert!((rows[2].log10_ber1_shot - (-69.0)).abs() <= 1.5);

        // Row order follows input order.
        let vals: Vec<f64> = rows.iter().map(|r| r.n_p).collect();
        assert_eq!(vals, vec![10.0, 100.0, 1000.0]);
    }

    #[test]
    fn table_single_entry() {
        let rows = ber_table(&[100.0], &[300.0], &cfg(100.0, 300.0)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].log10_ber0_min, rows[0].log10_ber0_max);
        assert!(ber_table(&[], &[300.0], &cfg(100.0, 300.0)).is_err());
    }

    #[test]
    fn table_text_render_mentions_rows() {
        let rows = ber_table(&[10.0, 100.0], &[300.0, 500.0], &cfg(100.0, 300.0)).unwrap();
        let text = ber_table_to_text(&rows);
        assert!(text.contains("BER_1^shot"));
        assert!(text.lines().count() >= 4);
    }
}
