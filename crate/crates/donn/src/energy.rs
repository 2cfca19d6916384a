//! Closed-form interconnect energy accounting.
//!
//! Models the per-bit cost of moving data between compute units over an
//! electrical wire versus an optical link driven by a laser/LED source. The
//! electrical path charges the wire plus the receiving inverter gate on
//! average one time in four (random bits only pay for 0->1 transitions). The
//! optical path pays the source energy needed to deposit enough photocharge
//! on the detector/inverter load to reach the logic swing, and pays it for
//! every `1` plus the active reset, hence a switching factor of one half.
//!
//! All energies are in joules internally; report layers convert to fJ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elementary charge, C (2019 SI exact value).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant, J/K (2019 SI exact value).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Parameters for the electrical and optical per-bit energy formulas.
///
/// Capacitances are in farads, lengths in micrometres, `photon_energy_ev`
/// in electron-volts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyConfig {
    /// Wire capacitance per unit length, F/um.
    pub c_wire_per_um: f64,
    /// Inverter gate capacitance C_T, F.
    pub c_inverter: f64,
    /// Photodetector capacitance C_det, F.
    pub c_detector: f64,
    /// Supply voltage, V.
    pub v_dd: f64,
    /// Photon energy h*nu/e, eV. Must be at or above the detector bandgap;
    /// only positivity is enforced here.
    pub photon_energy_ev: f64,
    /// Source wall-plug efficiency, in (0, 1].
    pub wpe: f64,
    /// Electrical wire length between compute units, um.
    pub wire_length_um: f64,
    /// Detector responsivity in electrons/photon, in (0, 1].
    pub responsivity: f64,
    /// Multiplicative optical loss compensation factor (>= 1 means the
    /// source must emit that many times more photons). Default 1.0.
    pub optical_loss_factor: f64,
}

impl Default for EnergyConfig {
    /// The published global parameter set: 0.2 fF/um wire, 0.1 fF inverter,
    /// 0.1 fF detector, 1.12 eV photons, WPE 0.5, at the minimum
    /// inter-multiplier spacing (5 um, 0.80 V).
    fn default() -> Self {
        EnergyConfig {
            c_wire_per_um: 0.2e-15,
            c_inverter: 0.1e-15,
            c_detector: 0.1e-15,
            v_dd: 0.80,
            photon_energy_ev: 1.12,
            wpe: 0.5,
            wire_length_um: 5.0,
            responsivity: 1.0,
            optical_loss_factor: 1.0,
        }
    }
}

impl EnergyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_wire_per_um > 0.0) {
            return Err(Error::config("c_wire_per_um", "must be > 0"));
        }
        if !(self.c_inverter >= 0.0) {
            return Err(Error::config("c_inverter", "must be >= 0"));
        }
        if !(self.c_detector >= 0.0) {
            return Err(Error::config("c_detector", "must be >= 0"));
        }
        if !(self.v_dd > 0.0) {
            return Err(Error::config("v_dd", "must be > 0"));
        }
        if !(self.photon_energy_ev > 0.0) {
            return Err(Error::config("photon_energy_ev", "must be > 0"));
        }
        if !(self.wpe > 0.0 && self.wpe <= 1.0) {
            return Err(Error::config("wpe", "must be in (0, 1]"));
        }
        if !(self.wire_length_um >= 0.0) {
            return Err(Error::config("wire_length_um", "must be >= 0"));
        }
        if !(self.responsivity > 0.0 && self.responsivity <= 1.0) {
            return Err(Error::config("responsivity", "must be in (0, 1]"));
        }
        if !(self.optical_loss_factor >= 1.0) {
            return Err(Error::config("optical_loss_factor", "must be >= 1"));
        }
        Ok(())
    }
}

/// Average electrical energy per transmitted bit over a wire of
/// `wire_length_um`: (1/4) * (C_wire/um * L + C_T) * V_dd^2.
pub fn electrical_energy_per_bit(cfg: &EnergyConfig) -> Result<f64> {
    cfg.validate()?;
    let c_load = cfg.c_wire_per_um * cfg.wire_length_um + cfg.c_inverter;
    Ok(0.25 * c_load * cfg.v_dd * cfg.v_dd)
}

/// Photons needed per received `1` to swing the detector + inverter load to
/// V_dd: (C_det + C_T) * V_dd / (e * responsivity).
pub fn photons_per_bit(cfg: &EnergyConfig) -> Result<f64> {
    cfg.validate()?;
    let c_load = cfg.c_detector + cfg.c_inverter;
    Ok(c_load * cfg.v_dd / (ELEMENTARY_CHARGE * cfg.responsivity))
}

/// Average optical energy per transmitted bit, including source wall-plug
/// efficiency and the 1/2 switching factor: (1/(2*WPE)) * h*nu * n_p.
/// Independent of wire length.
pub fn optical_energy_per_bit(cfg: &EnergyConfig) -> Result<f64> {
    let n_p = photons_per_bit(cfg)?;
    let photon_energy_j = cfg.photon_energy_ev * ELEMENTARY_CHARGE;
    Ok(photon_energy_j * n_p * cfg.optical_loss_factor / (2.0 * cfg.wpe))
}

/// Energy of one double-inverter repeater firing: C_T * V_dd^2.
pub fn repeater_energy_per_bit(cfg: &EnergyConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(cfg.c_inverter * cfg.v_dd * cfg.v_dd)
}

/// Wire length at which the electrical per-bit energy equals the optical
/// per-bit energy. Eq. for the electrical side is linear in L, so the
/// solution is closed-form; clamped at zero when optics wins at any length.
pub fn crossover_length(cfg: &EnergyConfig) -> Result<f64> {
    let e_opt = optical_energy_per_bit(cfg)?;
    let v2 = cfg.v_dd * cfg.v_dd;
    let length = (4.0 * e_opt / v2 - cfg.c_inverter) / cfg.c_wire_per_um;
    Ok(length.max(0.0))
}

/// One row of an energy sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub length_um: f64,
    /// Electrical energy per bit at this length, J.
    pub e_elec: f64,
    /// Optical energy per bit, J (constant over length).
    pub e_donn: f64,
}

/// Evaluate both per-bit energies over a list of wire lengths.
pub fn sweep_energy(cfg_base: &EnergyConfig, lengths_um: &[f64]) -> Result<Vec<SweepRow>> {
    if lengths_um.is_empty() {
        return Err(Error::usage("energy sweep needs at least one length"));
    }
    if let Some(bad) = lengths_um.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::usage(format!(
            "sweep lengths must be > 0 um, got {bad}"
        )));
    }
    let e_donn = optical_energy_per_bit(cfg_base)?;
    lengths_um
        .iter()
        .map(|&length_um| {
            let mut cfg = cfg_base.clone();
            cfg.wire_length_um = length_um;
            Ok(SweepRow {
                length_um,
                e_elec: electrical_energy_per_bit(&cfg)?,
                e_donn,
            })
        })
        .collect()
}

/// Render a sweep as CSV with energies in femtojoules.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("length_um,e_elec_fj,e_donn_fj\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.length_um,
            r.e_elec * 1e15,
            r.e_donn * 1e15
        ));
    }
    out
}

/// The published interconnect scenarios: abutted 8-bit MAC units at their
/// minimum and maximum spacing, a 7 nm SRAM macro hop, and a chiplet hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    InterMacMin,
    InterMacMax,
    InterSram,
    InterChiplet,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::InterMacMin,
        Scenario::InterMacMax,
        Scenario::InterSram,
        Scenario::InterChiplet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::InterMacMin => "inter_mac_min",
            Scenario::InterMacMax => "inter_mac_max",
            Scenario::InterSram => "inter_sram",
            Scenario::InterChiplet => "inter_chiplet",
        }
    }

    pub fn from_name(name: &str) -> Option<Scenario> {
        Scenario::ALL.iter().copied().find(|s| s.name() == name)
    }

    pub fn wire_length_um(self) -> f64 {
        match self {
            Scenario::InterMacMin => 5.0,
            Scenario::InterMacMax => 8.0,
            Scenario::InterSram => 60.0,
            Scenario::InterChiplet => 2500.0,
        }
    }

    pub fn v_dd(self) -> f64 {
        match self {
            Scenario::InterMacMin | Scenario::InterMacMax => 0.80,
            Scenario::InterSram => 0.75,
            Scenario::InterChiplet => 0.85,
        }
    }

    /// Base config with this scenario's wire length and supply voltage.
    pub fn apply(self, base: &EnergyConfig) -> EnergyConfig {
        let mut cfg = base.clone();
        cfg.wire_length_um = self.wire_length_um();
        cfg.v_dd = self.v_dd();
        cfg
    }
}

/// Evaluated energies for one scenario preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub wire_length_um: f64,
    pub v_dd: f64,
    /// Electrical energy per bit, J.
    pub e_elec: f64,
    /// Optical energy per bit, J.
    pub e_donn: f64,
}

pub fn scenario_report(scenario: Scenario, base: &EnergyConfig) -> Result<ScenarioReport> {
    let cfg = scenario.apply(base);
    Ok(ScenarioReport {
        wire_length_um: cfg.wire_length_um,
        v_dd: cfg.v_dd,
        e_elec: electrical_energy_per_bit(&cfg)?,
        e_donn: optical_energy_per_bit(&cfg)?,
    })
}

/// Format an energy in joules as femtojoules with three significant figures,
/// the convention used in human-readable reports.
pub fn format_fj(energy_j: f64) -> String {
    let fj = energy_j * 1e15;
    if fj == 0.0 {
        return "0.00".to_string();
    }
    let mag = fj.abs().log10().floor() as i32;
    let decimals = (2 - mag).max(0) as usize;
    format!("{:.*}", decimals, fj)
}
