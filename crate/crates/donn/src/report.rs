//! Run reports: a self-contained record of one experiment.
//!
//! A report embeds the fully resolved configuration (as JSON), the seed, and
//! every measured quantity, so re-running with the embedded config must
//! reproduce all stochastic results bit-identically. Timestamp and
//! wall-clock fields are the only values allowed to differ between
//! otherwise identical runs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::BerStats;
use crate::dataflow::EnergyTally;
use crate::error::{Error, Result};
use crate::network::OutputScores;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    /// Tool name and version that produced the report.
    pub tool: String,
    /// The subcommand / experiment that ran.
    pub command: String,
    pub seed: u64,
    /// Fully resolved configuration snapshot.
    pub config: serde_json::Value,
    /// Unix timestamp; excluded from determinism comparisons.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp_unix: Option<u64>,
    /// Wall-clock seconds; excluded from determinism comparisons.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_clock_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub energy: Option<EnergyTally>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ber: Option<BerStats>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub confusion_matrix: Option<Vec<Vec<u32>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub output_scores: Option<OutputScores>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diag_differences: Option<Vec<f64>>,
    /// Free-form numeric results (crossover length, BER factors, ...).
    #[serde(skip_serializing_if = "serde_json::Map::is_empty", default)]
    pub metrics: serde_json::Map<String, serde_json::Value>,
}

impl RunReport {
    pub fn new(command: &str, seed: u64, config: serde_json::Value) -> RunReport {
        RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            tool: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            seed,
            config,
            timestamp_unix: None,
            wall_clock_seconds: None,
            energy: None,
            ber: None,
            accuracy: None,
            confusion_matrix: None,
            output_scores: None,
            diag_differences: None,
            metrics: serde_json::Map::new(),
        }
    }

    pub fn stamp(&mut self, wall_clock_seconds: f64) {
        self.timestamp_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
        self.wall_clock_seconds = Some(wall_clock_seconds);
    }

    pub fn set_metric(&mut self, key: &str, value: f64) {
        self.metrics
            .insert(key.to_string(), serde_json::json!(value));
    }

    /// Copy with the timestamp fields cleared, for determinism comparisons.
    pub fn without_timestamps(&self) -> RunReport {
        RunReport {
            timestamp_unix: None,
            wall_clock_seconds: None,
            ..self.clone()
        }
    }
}

/// Serialize a report as pretty JSON. serde_json prints floats with the
/// shortest representation that round-trips, so persisted values re-parse
/// bit-identically.
pub fn write_report(report: &RunReport, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, report)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<RunReport> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let report: RunReport = serde_json::from_reader(BufReader::new(file))?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::Version {
            found: report.schema_version,
            expected: REPORT_SCHEMA_VERSION,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> RunReport {
        let mut r = RunReport::new("infer", 42, serde_json::json!({"photons_per_bit": 1000.0}));
        r.accuracy = Some(0.958);
        r.set_metric("crossover_um", 5.1000000000000005);
        r.energy = Some(EnergyTally {
            steps: 392,
            bits_transmitted: 1192,
            energy_electrical_bus_j: 9.4e-12,
            bits_received: 78400,
            zero_to_one_transitions: 19577,
            ones_transmitted: 39123,
            macs_performed: 4900,
            energy_electrical_j: 1.3799999999999998e-11,
            energy_repeater_j: 1.2e-12,
            energy_optical_j: 1.4029e-11,
        });
        r
    }

    #[test]
    fn write_read_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let report = sample_report();
        write_report(&report, &path).unwrap();
        let loaded = read_report(&path).unwrap();
        assert_eq!(report, loaded);
        // Floats survive the text round trip bit-exactly.
        assert_eq!(
            loaded.energy.as_ref().unwrap().energy_electrical_j,
            1.3799999999999998e-11
        );
    }

    #[test]
    fn absent_optional_fields_stay_absent() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        write_report(&sample_report(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(!text.contains("confusion_matrix"));
        assert!(!text.contains("null"));
    }

    #[test]
    fn version_mismatch_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let mut report = sample_report();
        report.schema_version = 999;
        write_report(&report, &path).unwrap();
        assert!(matches!(
            read_report(&path),
            Err(Error::Version {
                found: 999,
                expected: REPORT_SCHEMA_VERSION
            })
        ));
    }

    #[test]
    fn timestamps_are_stripped_for_comparison() {
        let mut a = sample_report();
        a.stamp(1.25);
        let mut b = sample_report();
        b.stamp(9.75);
        assert_ne!(a, b);
        assert_eq!(a.without_timestamps(), b.without_timestamps());
    }
}

