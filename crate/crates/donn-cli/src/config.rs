//! Layered configuration: built-in defaults, then an optional TOML file
//! (`--config` flag or the `DONN_CONFIG` env var), then command-line flags.
//! The fully resolved values are echoed into every run report.
//!
//! File units are human-scale: capacitances in fF, energies in eV, lengths
//! in um. They are converted to SI when building the library configs.

use std::path::{Path, PathBuf};

use donn::frame::AxisSet;
use donn::{ChannelConfig, EnergyConfig, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

const FF: f64 = 1e-15;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    #[serde(default)]
    pub energy: EnergySection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub train: TrainSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySection {
    pub c_wire_ff_per_um: Option<f64>,
    pub c_inverter_ff: Option<f64>,
    pub c_detector_ff: Option<f64>,
    pub v_dd: Option<f64>,
    pub photon_energy_ev: Option<f64>,
    pub wpe: Option<f64>,
    pub wire_length_um: Option<f64>,
    pub responsivity: Option<f64>,
    pub optical_loss_factor: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub xtalk_fraction: Option<f64>,
    pub photons_per_bit: Option<f64>,
    pub temperature_k: Option<f64>,
    pub c_total_ff: Option<f64>,
    pub threshold_fraction: Option<f64>,
    pub enable_shot: Option<bool>,
    pub enable_thermal: Option<bool>,
    pub enable_xtalk: Option<bool>,
    /// "rows" | "cols" | "both"
    pub xtalk_axes: Option<String>,
    pub correct_xtalk: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub dropout: Option<f64>,
    pub epochs: Option<usize>,
    pub momentum: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::runtime(format!("cannot read config {path:?}: {e}")))?;
        toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("malformed config {path:?}: {e}")))
    }

    /// Resolve from `--config`, else `DONN_CONFIG`, else empty defaults.
    pub fn resolve(flag: Option<&Path>) -> Result<FileConfig, CliError> {
        if let Some(path) = flag {
            return FileConfig::load(path);
        }
        if let Ok(env_path) = std::env::var("DONN_CONFIG") {
            return FileConfig::load(Path::new(&env_path));
        }
        Ok(FileConfig::default())
    }

    pub fn energy_config(&self) -> EnergyConfig {
        let d = EnergyConfig::default();
        let s = &self.energy;
        EnergyConfig {
            c_wire_per_um: s.c_wire_ff_per_um.map_or(d.c_wire_per_um, |v| v * FF),
            c_inverter: s.c_inverter_ff.map_or(d.c_inverter, |v| v * FF),
            c_detector: s.c_detector_ff.map_or(d.c_detector, |v| v * FF),
            v_dd: s.v_dd.unwrap_or(d.v_dd),
            photon_energy_ev: s.photon_energy_ev.unwrap_or(d.photon_energy_ev),
            wpe: s.wpe.unwrap_or(d.wpe),
            wire_length_um: s.wire_length_um.unwrap_or(d.wire_length_um),
            responsivity: s.responsivity.unwrap_or(d.responsivity),
            optical_loss_factor: s.optical_loss_factor.unwrap_or(d.optical_loss_factor),
        }
    }

    pub fn channel_config(&self, seed: u64) -> Result<ChannelConfig, CliError> {
        let d = ChannelConfig::default();
        let s = &self.channel;
        let xtalk_axes = match s.xtalk_axes.as_deref() {
            None => d.xtalk_axes,
            Some("rows") => AxisSet::Rows,
            Some("cols") => AxisSet::Cols,
            Some("both") => AxisSet::Both,
            Some(other) => {
                return Err(CliError::usage(format!(
                    "unknown xtalk_axes '{other}' (expected rows, cols or both)"
                )))
            }
        };
        Ok(ChannelConfig {
            xtalk_fraction: s.xtalk_fraction.unwrap_or(d.xtalk_fraction),
            photons_per_bit: s.photons_per_bit.unwrap_or(d.photons_per_bit),
            temperature_k: s.temperature_k.unwrap_or(d.temperature_k),
            c_total: s.c_total_ff.map_or(d.c_total, |v| v * FF),
            threshold_fraction: s.threshold_fraction.unwrap_or(d.threshold_fraction),
            seed,
            enable_shot: s.enable_shot.unwrap_or(d.enable_shot),
            enable_thermal: s.enable_thermal.unwrap_or(d.enable_thermal),
            enable_xtalk: s.enable_xtalk.unwrap_or(d.enable_xtalk),
            xtalk_axes,
            correct_xtalk: s.correct_xtalk.unwrap_or(d.correct_xtalk),
        })
    }

    pub fn train_config(&self) -> TrainConfig {
        let d = TrainConfig::default();
        let s = &self.train;
        TrainConfig {
            learning_rate: s.learning_rate.unwrap_or(d.learning_rate),
            batch_size: s.batch_size.unwrap_or(d.batch_size),
            dropout: s.dropout.unwrap_or(d.dropout),
            epochs: s.epochs.unwrap_or(d.epochs),
            momentum: s.momentum.unwrap_or(d.momentum),
        }
    }
}

/// Where MNIST lives: `--data-dir` flag, config file, `DONN_MNIST_DIR`,
/// then `./data`.
pub fn data_dir(flag: Option<&Path>, file: &FileConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = &file.data_dir {
        return p.clone();
    }
    if let Ok(p) = std::env::var("DONN_MNIST_DIR") {
        return PathBuf::from(p);
    }
    PathBuf::from("data")
}
