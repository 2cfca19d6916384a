pub mod ber;
pub mod energy;
pub mod infer;
pub mod train;

use std::path::PathBuf;

use crate::config::FileConfig;

/// Shared state resolved from global flags and the config file.
pub struct Context {
    pub file_cfg: FileConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
}
