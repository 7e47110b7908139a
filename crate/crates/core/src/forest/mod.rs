//! Random-forest regression under the absolute-error criterion, one forest
//! per physics parameter group.

mod search;
mod tree;

pub use search::{
    cv_score, randomized_search, sample_space, Distribution, DistributionSpace, SearchEntry, SearchReport, SearchSpace,
};
pub use tree::{fit_tree, fit_tree_on, Node, RegressionTree};

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{feature_matrix, T2PDataset};
use crate::error::ForestError;
use crate::physmap::ParamGroup;
use crate::vocab::{hex, Vocabulary};

pub const MODEL_FORMAT: &str = "tagphys-forest";
pub const MODEL_VERSION: u32 = 1;

/// Absolute row count, or a fraction of the training-set size (rounded up).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleCount {
    Count(usize),
    Fraction(f64),
}

impl SampleCount {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            Self::Count(c) => c,
            Self::Fraction(f) => (f * n as f64).ceil() as usize,
        }
    }

    fn check(self, name: &str) -> Result<(), ForestError> {
        let ok = match self {
            Self::Count(c) => c >= 1,
            Self::Fraction(f) => f > 0.0 && f <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(ForestError::InvalidHyperparams(format!("{name} = {self:?}")))
        }
    }
}

fn default_bootstrap() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestHyperparams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub min_samples_split: SampleCount,
    pub min_samples_leaf: SampleCount,
    pub max_features: f64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: bool,
}

impl ForestHyperparams {
    /// Configuration used for the four stiffness groups.
    pub fn stiffness() -> Self {
        Self {
            n_estimators: 100,
            max_depth: 20,
            min_samples_split: SampleCount::Fraction(0.0420),
            min_samples_leaf: SampleCount::Fraction(0.0094),
            max_features: 0.6911,
            bootstrap: true,
        }
    }

    /// Configuration used for the buckling-ratio group.
    pub fn buckling_ratio() -> Self {
        Self {
            n_estimators: 200,
            max_depth: 30,
            min_samples_split: SampleCount::Fraction(0.0703),
            min_samples_leaf: SampleCount::Fraction(0.0016),
            max_features: 0.9595,
            bootstrap: true,
        }
    }

    pub fn for_group(group: ParamGroup) -> Self {
        match group {
            ParamGroup::BucklingRatio => Self::buckling_ratio(),
            _ => Self::stiffness(),
        }
    }

    pub fn validate(&self) -> Result<(), ForestError> {
        if self.n_estimators == 0 {
            return Err(ForestError::InvalidHyperparams("n_estimators must be positive".into()));
        }
        if self.max_depth == 0 {
            return Err(ForestError::InvalidHyperparams("max_depth must be positive".into()));
        }
        if !(self.max_features > 0.0 && self.max_features <= 1.0) {
            return Err(ForestError::InvalidHyperparams(format!("max_features = {}", self.max_features)));
        }
        self.min_samples_split.check("min_samples_split")?;
        self.min_samples_leaf.check("min_samples_leaf")?;
        if let (SampleCount::Fraction(leaf), SampleCount::Fraction(split)) = (self.min_samples_leaf, self.min_samples_split) {
            if leaf > split {
                return Err(ForestError::InvalidHyperparams(format!(
                    "min_samples_leaf {leaf} exceeds min_samples_split {split}"
                )));
            }
        }
        Ok(())
    }

    pub fn feature_count(&self, d: usize) -> usize {
        ((self.max_features * d as f64).ceil() as usize).clamp(1, d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<RegressionTree>,
    pub target_names: Vec<String>,
    pub hyperparams: ForestHyperparams,
    pub train_fingerprint: String,
    pub vocab_fingerprint: String,
    pub group: Option<ParamGroup>,
    pub n_features: usize,
    pub seed: u64,
}

impl Forest {
    pub fn n_outputs(&self) -> usize {
        self.target_names.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>, ForestError> {
        if x.len() != self.n_features {
            return Err(ForestError::DimensionMismatch { expected: self.n_features, got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ForestError::NonFiniteInput);
        }
        let mut out = vec![0.0; self.n_outputs()];
        for t in &self.trees {
            for (o, v) in out.iter_mut().zip(t.predict(x)) {
                *o += v;
            }
        }
        let n = self.trees.len() as f64;
        out.iter_mut().for_each(|o| *o /= n);
        Ok(out)
    }

    pub fn predict_many(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, ForestError> {
        rows.iter().map(|r| self.predict(r)).collect()
    }
}

fn training_fingerprint(x: &[Vec<f64>], y: &[Vec<f64>], hp: &ForestHyperparams, seed: u64) -> String {
    let mut h = Sha256::new();
    for row in x.iter().chain(y) {
        for v in row {
            h.update(v.to_bits().to_le_bytes());
        }
        h.update(b";");
    }
    h.update(serde_json::to_vec(hp).expect("hyperparams serialize"));
    h.update(seed.to_le_bytes());
    hex(&h.finalize())
}

/// Generator for tree `index`; independent of how trees are scheduled.
fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Fits `hp.n_estimators` trees, each on a same-size bootstrap resample
/// (or on all rows when `hp.bootstrap` is off).
pub fn fit_forest(x: &[Vec<f64>], y: &[Vec<f64>], hp: &ForestHyperparams, seed: u64) -> Result<Forest, ForestError> {
    let (d, m) = tree::check_training(x, y)?;
    hp.validate()?;
    let n = x.len();
    let trees = (0..hp.n_estimators)
        .into_par_iter()
        .map(|i| {
            let mut rng = tree_rng(seed, i);
            let rows: Vec<usize> = if hp.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_tree_on(x, y, &rows, hp, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Forest {
        trees,
        target_names: (0..m).map(|i| format!("y{i}")).collect(),
        hyperparams: hp.clone(),
        train_fingerprint: training_fingerprint(x, y, hp, seed),
        vocab_fingerprint: String::new(),
        group: None,
        n_features: d,
        seed,
    })
}

/// Target matrix of `group` over the dataset rows.
pub fn group_targets(ds: &T2PDataset, group: ParamGroup) -> Vec<Vec<f64>> {
    ds.records().iter().map(|r| group.extract(&r.physics)).collect()
}

/// Fits the forest for one parameter group on a whole dataset.
pub fn fit_group(
    vocab: &Vocabulary,
    ds: &T2PDataset,
    group: ParamGroup,
    hp: &ForestHyperparams,
    seed: u64,
) -> Result<Forest, ForestError> {
    if ds.vocab_fingerprint() != vocab.fingerprint() {
        return Err(ForestError::FingerprintMismatch);
    }
    let x = feature_matrix(vocab, ds)?;
    let y = group_targets(ds, group);
    let mut f = fit_forest(&x, &y, hp, seed)?;
    f.target_names = group.target_names();
    f.vocab_fingerprint = vocab.fingerprint().to_string();
    f.group = Some(group);
    Ok(f)
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    forest: Forest,
}

pub fn forest_to_json(forest: &Forest) -> String {
    let doc = ModelDocument { format: MODEL_FORMAT.into(), version: MODEL_VERSION, forest: forest.clone() };
    serde_json::to_string(&doc).expect("forest serializes")
}

/// Parses a model document, rejecting other formats, versions, or a
/// vocabulary fingerprint different from `vocab`.
pub fn forest_from_json(text: &str, vocab: &Vocabulary) -> Result<Forest, ForestError> {
    let doc: ModelDocument = serde_json::from_str(text).map_err(|e| ForestError::BadDocument(e.to_string()))?;
    if doc.format != MODEL_FORMAT {
        return Err(ForestError::BadDocument(format!("format `{}`", doc.format)));
    }
    if doc.version != MODEL_VERSION {
        return Err(ForestError::BadDocument(format!("version {}", doc.version)));
    }
    let f = doc.forest;
    if f.vocab_fingerprint != vocab.fingerprint() {
        return Err(ForestError::FingerprintMismatch);
    }
    if f.trees.is_empty() || f.trees.iter().any(|t| t.n_outputs != f.target_names.len() || t.n_features != f.n_features) {
        return Err(ForestError::BadDocument("inconsistent tree shapes".into()));
    }
    Ok(f)
}

pub fn save_forest(forest: &Forest, path: &Path) -> Result<(), ForestError> {
    std::fs::write(path, forest_to_json(forest)).map_err(|e| ForestError::BadDocument(format!("{}: {e}", path.display())))
}

pub fn load_forest(path: &Path, vocab: &Vocabulary) -> Result<Forest, ForestError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| ForestError::BadDocument(format!("{}: {e}", path.display())))?;
    forest_from_json(&text, vocab)
}
