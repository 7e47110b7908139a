//! Optional JSON config file. Command-line flags override its values,
//! which override the built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use tagphys::physmap::DtMode;

use crate::error::{parse_json, read_text, CliError};

pub const CONFIG_ENV: &str = "TAGPHYS_CONFIG";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub friction: Option<f64>,
    pub damping: Option<f64>,
    pub dt_mode: Option<DtMode>,
    pub dt_tolerance: Option<f64>,
    pub cv_folds: Option<usize>,
    pub bounds_margin: Option<f64>,
    pub voxel_mm: Option<f64>,
    pub vocab_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => parse_json(p, &read_text(p)?),
        }
    }
}

/// First present value of flag, then config, then the default.
pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}
