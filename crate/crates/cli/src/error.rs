use std::path::Path;

use tagphys::error::{DatasetError, ForestError, MetricError, PhysError, SimError, TagError, VocabError};
use thiserror::Error;

/// Exit status 1 for domain errors, 2 for I/O and usage errors.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Domain(_) => 1,
            Self::Usage(_) | Self::Io(_) => 2,
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } => Self::Io(e.to_string()),
            other => Self::Domain(other.to_string()),
        }
    }
}

impl From<ForestError> for CliError {
    fn from(e: ForestError) -> Self {
        match e {
            ForestError::Dataset(d) => d.into(),
            other => Self::Domain(other.to_string()),
        }
    }
}

impl From<PhysError> for CliError {
    fn from(e: PhysError) -> Self {
        match e {
            PhysError::Dataset(d) => d.into(),
            PhysError::Forest(f) => f.into(),
            other => Self::Domain(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Io { .. } => Self::Io(e.to_string()),
            other => Self::Domain(other.to_string()),
        }
    }
}

impl From<VocabError> for CliError {
    fn from(e: VocabError) -> Self {
        match e {
            VocabError::Io { .. } => Self::Io(e.to_string()),
            other => Self::Domain(other.to_string()),
        }
    }
}

impl From<TagError> for CliError {
    fn from(e: TagError) -> Self {
        Self::Domain(e.to_string())
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        Self::Domain(e.to_string())
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("creating {}: {e}", parent.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Domain(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}
