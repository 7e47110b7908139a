//! Density/thickness estimation by hierarchical retrieval over the dataset.
//!
//! Candidates are searched among records sharing the query's family and
//! structure, relaxing the composition predicate level by level:
//!
//! 1. same fiber set, every percentage within the tolerance;
//! 2. same fiber set, percentages ignored;
//! 3. same primary fiber.
//!
//! When all three are empty the search widens to records of the same
//! structure type, and finally to the whole dataset. The estimate is then
//! aggregated from the candidate set by mean, median or a seeded random pick.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{stratified_kfold, StratifyBy, T2PDataset, T2PRecord};
use crate::error::DatasetError;
use crate::tagparse::FabricAttributes;

/// Per-fiber percentage tolerance for an exact composition match.
pub const DEFAULT_PERCENT_TOLERANCE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchLevel {
    ExactComposition,
    MaterialSet,
    PrimaryFiber,
    StructureFallback,
    GlobalFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationMode {
    Mean,
    Median,
    Random,
}

impl AggregationMode {
    /// Tie-break order for mode selection.
    pub const ALL: [AggregationMode; 3] = [Self::Mean, Self::Median, Self::Random];
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mean => "mean",
            Self::Median => "median",
            Self::Random => "random",
        })
    }
}

impl FromStr for AggregationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(Self::Mean),
            "median" => Ok(Self::Median),
            "random" => Ok(Self::Random),
            _ => Err(format!("unknown aggregation mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityThicknessEstimate {
    pub density: f64,
    pub thickness: f64,
    pub level: MatchLevel,
    pub candidate_count: usize,
}

pub fn exact_composition_match(query: &FabricAttributes, r: &T2PRecord, tol: f64) -> bool {
    let c = &r.attributes.composition;
    query.composition.fiber_set() == c.fiber_set()
        && query
            .composition
            .entries()
            .iter()
            .all(|e| (c.percent_of(&e.fiber) - e.percent).abs() <= tol)
}

pub fn material_set_match(query: &FabricAttributes, r: &T2PRecord) -> bool {
    query.composition.fiber_set() == r.attributes.composition.fiber_set()
}

pub fn primary_fiber_match(query: &FabricAttributes, r: &T2PRecord) -> bool {
    query.composition.primary() == r.attributes.composition.primary()
}

fn same_family_structure(query: &FabricAttributes, r: &T2PRecord) -> bool {
    r.attributes.family == query.family && r.attributes.structure == query.structure
}

/// Indices of the most specific non-empty candidate set and its level.
pub fn retrieve_candidates(
    attrs: &FabricAttributes,
    ds: &T2PDataset,
    tol: f64,
) -> Result<(Vec<usize>, MatchLevel), DatasetError> {
    if ds.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    let records = ds.records();
    let pool: Vec<usize> = (0..records.len()).filter(|&i| same_family_structure(attrs, &records[i])).collect();
    let select = |pred: &dyn Fn(&T2PRecord) -> bool| -> Vec<usize> {
        pool.iter().copied().filter(|&i| pred(&records[i])).collect()
    };
    let levels: [(MatchLevel, Vec<usize>); 3] = [
        (MatchLevel::ExactComposition, select(&|r| exact_composition_match(attrs, r, tol))),
        (MatchLevel::MaterialSet, select(&|r| material_set_match(attrs, r))),
        (MatchLevel::PrimaryFiber, select(&|r| primary_fiber_match(attrs, r))),
    ];
    if let Some((level, c)) = levels.into_iter().find(|(_, c)| !c.is_empty()) {
        return Ok((c, level));
    }
    let same_structure: Vec<usize> =
        (0..records.len()).filter(|&i| records[i].attributes.structure == attrs.structure).collect();
    if !same_structure.is_empty() {
        return Ok((same_structure, MatchLevel::StructureFallback));
    }
    Ok(((0..records.len()).collect(), MatchLevel::GlobalFallback))
}

/// Aggregates (density, thickness) over candidate records. Median and random
/// modes return a single record's pair so the two stay jointly sampled.
pub fn aggregate(records: &[&T2PRecord], mode: AggregationMode, seed: u64) -> (f64, f64) {
    assert!(!records.is_empty(), "aggregate needs at least one candidate");
    match mode {
        AggregationMode::Mean => {
            let n = records.len() as f64;
            let rho = records.iter().map(|r| r.density()).sum::<f64>() / n;
            let t = records.iter().map(|r| r.thickness()).sum::<f64>() / n;
            (rho, t)
        }
        AggregationMode::Median => {
            let mut sorted: Vec<&&T2PRecord> = records.iter().collect();
            sorted.sort_by(|a, b| {
                a.density()
                    .total_cmp(&b.density())
                    .then(a.thickness().total_cmp(&b.thickness()))
                    .then_with(|| a.id.cmp(&b.id))
            });
            let r = sorted[(sorted.len() - 1) / 2];
            (r.density(), r.thickness())
        }
        AggregationMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = records[rng.gen_range(0..records.len())];
            (r.density(), r.thickness())
        }
    }
}

pub fn estimate_density_thickness(
    attrs: &FabricAttributes,
    ds: &T2PDataset,
    mode: AggregationMode,
    tol: f64,
    seed: u64,
) -> Result<DensityThicknessEstimate, DatasetError> {
    let (idx, level) = retrieve_candidates(attrs, ds, tol)?;
    let records: Vec<&T2PRecord> = idx.iter().map(|&i| &ds.records()[i]).collect();
    let (density, thickness) = aggregate(&records, mode, seed);
    Ok(DensityThicknessEstimate { density, thickness, level, candidate_count: idx.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeScore {
    pub mode: AggregationMode,
    /// Range-normalized MAE of (density, thickness), averaged over folds.
    pub mean_nmae: f64,
    pub per_fold: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSelection {
    pub selected: AggregationMode,
    pub scores: Vec<ModeScore>,
}

fn range_of(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let r = hi - lo;
    if r > 0.0 && r.is_finite() {
        r
    } else {
        1.0
    }
}

/// Per-mode CV error: each held-out record is queried without its density
/// and thickness; errors are divided by the fold-train range of each scalar
/// and the two scalars averaged. Ties resolve as mean, median, random.
pub fn select_mode_cv(ds: &T2PDataset, k: usize, seed: u64, tol: f64) -> Result<ModeSelection, DatasetError> {
    select_mode_cv_by(ds, k, seed, tol, StratifyBy::Structure)
}

pub fn select_mode_cv_by(
    ds: &T2PDataset,
    k: usize,
    seed: u64,
    tol: f64,
    by: StratifyBy,
) -> Result<ModeSelection, DatasetError> {
    let folds = stratified_kfold(ds, k, by, seed)?;
    let mut scores: Vec<ModeScore> = AggregationMode::ALL
        .iter()
        .map(|&mode| ModeScore { mode, mean_nmae: 0.0, per_fold: Vec::new() })
        .collect();
    for (fi, fold) in folds.iter().enumerate() {
        if fold.holdout.is_empty() || fold.train.is_empty() {
            continue;
        }
        let train = ds.subset(&fold.train);
        let rho_range = range_of(train.records().iter().map(T2PRecord::density));
        let t_range = range_of(train.records().iter().map(T2PRecord::thickness));
        let mut err = [0.0f64; 3];
        for (qi, &h) in fold.holdout.iter().enumerate() {
            let rec = &ds.records()[h];
            let mut query = rec.attributes.clone();
            query.density = None;
            query.thickness = None;
            let (idx, _) = retrieve_candidates(&query, &train, tol)?;
            let cands: Vec<&T2PRecord> = idx.iter().map(|&i| &train.records()[i]).collect();
            for (m, &mode) in AggregationMode::ALL.iter().enumerate() {
                let query_seed = seed ^ ((fi as u64) << 32 | qi as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                let (rho, t) = aggregate(&cands, mode, query_seed);
                err[m] += 0.5 * ((rho - rec.density()).abs() / rho_range + (t - rec.thickness()).abs() / t_range);
            }
        }
        for m in 0..3 {
            scores[m].per_fold.push(err[m] / fold.holdout.len() as f64);
        }
    }
    for s in &mut scores {
        s.mean_nmae = s.per_fold.iter().sum::<f64>() / s.per_fold.len().max(1) as f64;
    }
    let mut selected = scores[0].mode;
    let mut best = scores[0].mean_nmae;
    for s in &scores[1..] {
        if s.mean_nmae < best - 1e-12 {
            best = s.mean_nmae;
            selected = s.mode;
        }
    }
    Ok(ModeSelection { selected, scores })
}
