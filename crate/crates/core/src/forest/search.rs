//! Randomized hyperparameter search scored by stratified k-fold CV.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{fit_forest, group_targets, tree::output_scale, ForestHyperparams, SampleCount};
use crate::dataset::{feature_matrix, stratified_kfold, Fold, StratifyBy, T2PDataset};
use crate::error::ForestError;
use crate::physmap::ParamGroup;
use crate::vocab::Vocabulary;

const BUILTIN_SPACE: &str = include_str!("../../data/search_space.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Choice(Vec<f64>),
    Uniform([f64; 2]),
    LogUniform([f64; 2]),
}

impl Distribution {
    fn check(&self, name: &str) -> Result<(), ForestError> {
        let ok = match self {
            Self::Choice(v) => !v.is_empty() && v.iter().all(|x| x.is_finite()),
            Self::Uniform([lo, hi]) => lo.is_finite() && hi.is_finite() && lo <= hi,
            Self::LogUniform([lo, hi]) => *lo > 0.0 && hi.is_finite() && lo <= hi,
        };
        if ok {
            Ok(())
        } else {
            Err(ForestError::InvalidHyperparams(format!("distribution for {name}: {self:?}")))
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Choice(v) => v[rng.gen_range(0..v.len())],
            Self::Uniform([lo, hi]) => {
                if lo == hi {
                    *lo
                } else {
                    rng.gen_range(*lo..*hi)
                }
            }
            Self::LogUniform([lo, hi]) => {
                if lo == hi {
                    *lo
                } else {
                    rng.gen_range(lo.ln()..hi.ln()).exp()
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpace {
    pub n_estimators: Distribution,
    pub max_depth: Distribution,
    pub min_samples_split: Distribution,
    pub min_samples_leaf: Distribution,
    pub max_features: Distribution,
}

/// Either distributions to sample from, or an explicit candidate list that
/// is sampled without replacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchSpace {
    Distributions(DistributionSpace),
    Candidates(Vec<ForestHyperparams>),
}

impl SearchSpace {
    pub fn builtin() -> Self {
        serde_json::from_str(BUILTIN_SPACE).expect("builtin search space parses")
    }
}

fn as_sample_count(v: f64) -> SampleCount {
    if v < 1.0 {
        SampleCount::Fraction(v)
    } else {
        SampleCount::Count(v.round() as usize)
    }
}

/// Draws up to `iters` configurations from `space`.
pub fn sample_space(space: &SearchSpace, iters: usize, seed: u64) -> Result<Vec<ForestHyperparams>, ForestError> {
    if iters == 0 {
        return Err(ForestError::EmptySpace);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match space {
        SearchSpace::Candidates(list) => {
            if list.is_empty() {
                return Err(ForestError::EmptySpace);
            }
            for hp in list {
                hp.validate()?;
            }
            let take = iters.min(list.len());
            Ok(sample(&mut rng, list.len(), take).into_iter().map(|i| list[i].clone()).collect())
        }
        SearchSpace::Distributions(d) => {
            d.n_estimators.check("n_estimators")?;
            d.max_depth.check("max_depth")?;
            d.min_samples_split.check("min_samples_split")?;
            d.min_samples_leaf.check("min_samples_leaf")?;
            d.max_features.check("max_features")?;
            (0..iters)
                .map(|_| {
                    let split = as_sample_count(d.min_samples_split.draw(&mut rng));
                    let mut leaf = as_sample_count(d.min_samples_leaf.draw(&mut rng));
                    if let (SampleCount::Fraction(l), SampleCount::Fraction(s)) = (leaf, split) {
                        leaf = SampleCount::Fraction(l.min(s));
                    }
                    let hp = ForestHyperparams {
                        n_estimators: d.n_estimators.draw(&mut rng).round().max(1.0) as usize,
                        max_depth: d.max_depth.draw(&mut rng).round().max(1.0) as usize,
                        min_samples_split: split,
                        min_samples_leaf: leaf,
                        max_features: d.max_features.draw(&mut rng).clamp(f64::MIN_POSITIVE, 1.0),
                        bootstrap: true,
                    };
                    hp.validate()?;
                    Ok(hp)
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchEntry {
    pub hyperparams: ForestHyperparams,
    pub mean_score: f64,
    pub per_fold: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub group: ParamGroup,
    pub folds: usize,
    pub seed: u64,
    pub entries: Vec<SearchEntry>,
    pub best_index: usize,
}

fn pick(rows: &[Vec<f64>], idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter().map(|&i| rows[i].clone()).collect()
}

/// Mean over folds of the holdout MAE, each output divided by its range on
/// the fold's training rows and then averaged over outputs.
pub fn cv_score(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    folds: &[Fold],
    hp: &ForestHyperparams,
    seed: u64,
) -> Result<(f64, Vec<f64>), ForestError> {
    let mut per_fold = Vec::with_capacity(folds.len());
    for fold in folds {
        if fold.holdout.is_empty() || fold.train.is_empty() {
            continue;
        }
        let (xt, yt) = (pick(x, &fold.train), pick(y, &fold.train));
        let forest = fit_forest(&xt, &yt, hp, seed)?;
        let all: Vec<usize> = (0..yt.len()).collect();
        let scale = output_scale(&yt, &all);
        let mut total = 0.0;
        for &i in &fold.holdout {
            let p = forest.predict(&x[i])?;
            total += p.iter().zip(&y[i]).zip(&scale).map(|((a, b), s)| (a - b).abs() / s).sum::<f64>();
        }
        per_fold.push(total / (fold.holdout.len() * scale.len()) as f64);
    }
    if per_fold.is_empty() {
        return Err(ForestError::EmptyTraining);
    }
    Ok((per_fold.iter().sum::<f64>() / per_fold.len() as f64, per_fold))
}

/// Scores `iters` sampled configurations by k-fold CV for `group` and
/// returns the best one (first on ties) with the full report.
#[allow(clippy::too_many_arguments)]
pub fn randomized_search(
    vocab: &Vocabulary,
    ds: &T2PDataset,
    group: ParamGroup,
    space: &SearchSpace,
    iters: usize,
    k: usize,
    seed: u64,
    by: StratifyBy,
) -> Result<(ForestHyperparams, SearchReport), ForestError> {
    if ds.vocab_fingerprint() != vocab.fingerprint() {
        return Err(ForestError::FingerprintMismatch);
    }
    let configs = sample_space(space, iters, seed)?;
    let folds = stratified_kfold(ds, k, by, seed)?;
    let x = feature_matrix(vocab, ds)?;
    let y = group_targets(ds, group);
    let mut entries = Vec::with_capacity(configs.len());
    let mut best_index = 0;
    for (i, hp) in configs.into_iter().enumerate() {
        let (mean_score, per_fold) = cv_score(&x, &y, &folds, &hp, seed)?;
        if mean_score < entries.get(best_index).map_or(f64::INFINITY, |e: &SearchEntry| e.mean_score) {
            best_index = i;
        }
        entries.push(SearchEntry { hyperparams: hp, mean_score, per_fold });
    }
    let best = entries[best_index].hyperparams.clone();
    Ok((best, SearchReport { group, folds: k, seed, entries, best_index }))
}
