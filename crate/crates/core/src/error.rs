use thiserror::Error;

use crate::tagparse::Violation;

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("{file}:{line}: {reason}")]
    Malformed { file: &'static str, line: usize, reason: String },
    #[error("{file}: duplicate entry `{value}`")]
    Duplicate { file: &'static str, value: String },
    #[error("{file}: `{value}` is not a canonical entry")]
    UnknownCanonical { file: &'static str, value: String },
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TagError {
    #[error("unrecognized fiber `{0}`")]
    UnrecognizedFiber(String),
    #[error("malformed percentage `{0}`")]
    MalformedPercentage(String),
    #[error("percentages sum to {0}, expected 100 +/- 0.5")]
    SumViolation(f64),
    #[error("percentage `{0}` has no fiber name")]
    MissingFiberName(String),
    #[error("fiber `{0}` listed more than once")]
    DuplicateFiber(String),
    #[error("{0} fibers listed, at most 6 allowed")]
    TooManyFibers(usize),
    #[error("empty composition")]
    EmptyComposition,
    #[error("unknown fabric family `{0}`")]
    UnknownFamily(String),
    #[error("unknown structure type `{0}`")]
    UnknownStructure(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowDiagnostic {
    /// 1-based data row (the header is row 0).
    pub row: usize,
    pub problems: Vec<String>,
}

impl std::fmt::Display for RowDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "row {}: {}", self.row, self.problems.join("; "))
    }
}

fn join_rows(rows: &[RowDiagnostic]) -> String {
    rows.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("validation failed:\n{}", join_rows(.0))]
    Validation(Vec<RowDiagnostic>),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("density and thickness are required (missing {0})")]
    MissingScalar(&'static str),
    #[error("{0} must be positive and finite")]
    InvalidScalar(&'static str),
    #[error("split ratios must be non-negative and sum to 1")]
    InvalidRatios,
    #[error("need at least 2 folds, got {0}")]
    InvalidFolds(usize),
    #[error("vocabulary fingerprint mismatch")]
    FingerprintMismatch,
}

impl DatasetError {
    pub fn from_violations(row: usize, violations: &[Violation]) -> Self {
        Self::Validation(vec![RowDiagnostic {
            row,
            problems: violations.iter().map(ToString::to_string).collect(),
        }])
    }
}

#[derive(Debug, Error)]
pub enum ForestError {
    #[error("empty training set")]
    EmptyTraining,
    #[error("non-finite value in training data")]
    NonFiniteInput,
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("feature and target row counts differ ({x} vs {y})")]
    RowMismatch { x: usize, y: usize },
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("search space is empty")]
    EmptySpace,
    #[error("model vocabulary fingerprint does not match")]
    FingerprintMismatch,
    #[error("unsupported model document: {0}")]
    BadDocument(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Error)]
pub enum PhysError {
    #[error("model for `{0}` was trained with a different vocabulary")]
    ModelVocabMismatch(String),
    #[error("missing model for group `{0}`")]
    MissingModel(String),
    #[error("invalid bounds for `{field}`: [{lower}, {upper}]")]
    InvalidBounds { field: String, lower: f64, upper: f64 },
    #[error("invalid physics parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Forest(#[from] ForestError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("length mismatch ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no examples")]
    Empty,
    #[error("label `{0}` is not in the class vocabulary")]
    UnknownLabel(String),
    #[error("ground truth has zero range")]
    ZeroRange,
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("probability at position {0} is not in (0, 1]")]
    ZeroProbability(usize),
    #[error("class `{0}` has zero count")]
    ZeroCount(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid cloth spec: {0}")]
    InvalidSpec(String),
    #[error("invalid physics parameters: {0}")]
    InvalidParams(String),
    #[error("unstable configuration: dt {dt:.3e} s exceeds limit {limit:.3e} s")]
    UnstableConfig { dt: f64, limit: f64 },
    #[error("non-finite particle state at step {0}")]
    NumericalBlowup(usize),
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("{0}")]
    Format(String),
    #[error("i/o on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}
