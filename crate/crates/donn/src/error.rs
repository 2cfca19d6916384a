//! Error types shared across the crate.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration field is out of its allowed range.
    #[error("invalid configuration: field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    /// The caller violated an operation precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// Calibration frames do not satisfy the normalization guard.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// A simulation-internal guard tripped (e.g. accumulator overflow).
    #[error("simulation error: {0}")]
    Simulation(String),

    /// Training diverged or otherwise failed.
    #[error("training error: {0}")]
    Training(String),

    /// A file could not be parsed; `offset` is the byte position at which
    /// parsing failed.
    #[error("parse error in {path:?} at byte {offset}: {reason}")]
    Parse {
        path: PathBuf,
        offset: u64,
        reason: String,
    },

    /// Persisted artifact has an unsupported schema version.
    #[error("schema version mismatch: found {found}, expected {expected}")]
    Version { found: u32, expected: u32 },

    #[error("io error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
