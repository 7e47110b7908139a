//! Simulator parameter set, its bounds, the random-parameter baseline and the
//! assembly of a full parameter set from trained models.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{featurize, T2PDataset};
use crate::error::PhysError;
use crate::forest::Forest;
use crate::retrieval::{estimate_density_thickness, AggregationMode, MatchLevel, DEFAULT_PERCENT_TOLERANCE};
use crate::tagparse::FabricAttributes;
use crate::vocab::Vocabulary;

const DEFAULT_BOUNDS: &str = include_str!("../data/default_bounds.json");

pub const FIELD_COUNT: usize = 20;

/// Column names shared by the dataset schema and the physics output document.
pub const FIELD_NAMES: [&str; FIELD_COUNT] = [
    "density_gsm",
    "thickness_mm",
    "friction",
    "damping",
    "buckle_stiff_bias_l",
    "buckle_stiff_bias_r",
    "buckle_stiff_warp",
    "buckle_stiff_weft",
    "buckle_ratio_bias_l",
    "buckle_ratio_bias_r",
    "buckle_ratio_warp",
    "buckle_ratio_weft",
    "bend_bias_l",
    "bend_bias_r",
    "bend_warp",
    "bend_weft",
    "shear_l",
    "shear_r",
    "stretch_warp",
    "stretch_weft",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Density,
    Thickness,
    Friction,
    Damping,
    Stiffness,
    Ratio,
}

pub fn field_kind(index: usize) -> FieldKind {
    match index {
        0 => FieldKind::Density,
        1 => FieldKind::Thickness,
        2 => FieldKind::Friction,
        3 => FieldKind::Damping,
        8..=11 => FieldKind::Ratio,
        _ => FieldKind::Stiffness,
    }
}

/// Fields that must be strictly positive.
fn strictly_positive(index: usize) -> bool {
    matches!(index, 0 | 1 | 18 | 19)
}

pub fn field_index(name: &str) -> Option<usize> {
    FIELD_NAMES.iter().position(|n| *n == name)
}

/// Per-direction values: bias-left, bias-right, warp, weft.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Directional {
    pub bias_l: f64,
    pub bias_r: f64,
    pub warp: f64,
    pub weft: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sided {
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WarpWeft {
    pub warp: f64,
    pub weft: f64,
}

/// Full cloth parameter set. Units: density g/m^2, thickness mm, stiffness
/// g*mm^2/s^2 (buckling, bending) or g/s^2 (shear, stretch).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "FlatPhysics", try_from = "FlatPhysics")]
pub struct PhysicsParams {
    pub density: f64,
    pub thickness: f64,
    pub friction: f64,
    pub internal_damping: f64,
    pub buckling_stiffness: Directional,
    pub buckling_ratio: Directional,
    pub bending_stiffness: Directional,
    pub shear_stiffness: Sided,
    pub stretch_stiffness: WarpWeft,
}

impl PhysicsParams {
    pub fn to_array(&self) -> [f64; FIELD_COUNT] {
        let d = |x: &Directional| [x.bias_l, x.bias_r, x.warp, x.weft];
        let b = d(&self.buckling_stiffness);
        let r = d(&self.buckling_ratio);
        let e = d(&self.bending_stiffness);
        [
            self.density,
            self.thickness,
            self.friction,
            self.internal_damping,
            b[0],
            b[1],
            b[2],
            b[3],
            r[0],
            r[1],
            r[2],
            r[3],
            e[0],
            e[1],
            e[2],
            e[3],
            self.shear_stiffness.left,
            self.shear_stiffness.right,
            self.stretch_stiffness.warp,
            self.stretch_stiffness.weft,
        ]
    }

    pub fn from_array(v: &[f64; FIELD_COUNT]) -> Self {
        let d = |i: usize| Directional { bias_l: v[i], bias_r: v[i + 1], warp: v[i + 2], weft: v[i + 3] };
        Self {
            density: v[0],
            thickness: v[1],
            friction: v[2],
            internal_damping: v[3],
            buckling_stiffness: d(4),
            buckling_ratio: d(8),
            bending_stiffness: d(12),
            shear_stiffness: Sided { left: v[16], right: v[17] },
            stretch_stiffness: WarpWeft { warp: v[18], weft: v[19] },
        }
    }

    pub fn validate(&self) -> Result<(), PhysError> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(PhysError::InvalidParams(problems.join("; ")))
        }
    }

    /// Human-readable invariant violations, empty when valid.
    pub fn problems(&self) -> Vec<String> {
        self.to_array()
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| {
                let name = FIELD_NAMES[i];
                if !v.is_finite() {
                    Some(format!("{name} is not finite"))
                } else if strictly_positive(i) && v <= 0.0 {
                    Some(format!("{name} > 0"))
                } else if v < 0.0 {
                    Some(format!("{name} >= 0"))
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn scale_stiffness(&self, factor: f64) -> Self {
        let mut v = self.to_array();
        for (i, x) in v.iter_mut().enumerate() {
            if field_kind(i) == FieldKind::Stiffness {
                *x *= factor;
            }
        }
        Self::from_array(&v)
    }
}

/// Flat, schema-named form used for CSV/JSON interchange.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatPhysics {
    pub density_gsm: f64,
    pub thickness_mm: f64,
    pub friction: f64,
    pub damping: f64,
    pub buckle_stiff_bias_l: f64,
    pub buckle_stiff_bias_r: f64,
    pub buckle_stiff_warp: f64,
    pub buckle_stiff_weft: f64,
    pub buckle_ratio_bias_l: f64,
    pub buckle_ratio_bias_r: f64,
    pub buckle_ratio_warp: f64,
    pub buckle_ratio_weft: f64,
    pub bend_bias_l: f64,
    pub bend_bias_r: f64,
    pub bend_warp: f64,
    pub bend_weft: f64,
    pub shear_l: f64,
    pub shear_r: f64,
    pub stretch_warp: f64,
    pub stretch_weft: f64,
}

impl From<PhysicsParams> for FlatPhysics {
    fn from(p: PhysicsParams) -> Self {
        let v = p.to_array();
        Self {
            density_gsm: v[0],
            thickness_mm: v[1],
            friction: v[2],
            damping: v[3],
            buckle_stiff_bias_l: v[4],
            buckle_stiff_bias_r: v[5],
            buckle_stiff_warp: v[6],
            buckle_stiff_weft: v[7],
            buckle_ratio_bias_l: v[8],
            buckle_ratio_bias_r: v[9],
            buckle_ratio_warp: v[10],
            buckle_ratio_weft: v[11],
            bend_bias_l: v[12],
            bend_bias_r: v[13],
            bend_warp: v[14],
            bend_weft: v[15],
            shear_l: v[16],
            shear_r: v[17],
            stretch_warp: v[18],
            stretch_weft: v[19],
        }
    }
}

impl From<FlatPhysics> for [f64; FIELD_COUNT] {
    fn from(f: FlatPhysics) -> Self {
        [
            f.density_gsm,
            f.thickness_mm,
            f.friction,
            f.damping,
            f.buckle_stiff_bias_l,
            f.buckle_stiff_bias_r,
            f.buckle_stiff_warp,
            f.buckle_stiff_weft,
            f.buckle_ratio_bias_l,
            f.buckle_ratio_bias_r,
            f.buckle_ratio_warp,
            f.buckle_ratio_weft,
            f.bend_bias_l,
            f.bend_bias_r,
            f.bend_warp,
            f.bend_weft,
            f.shear_l,
            f.shear_r,
            f.stretch_warp,
            f.stretch_weft,
        ]
    }
}

impl TryFrom<FlatPhysics> for PhysicsParams {
    type Error = PhysError;

    fn try_from(f: FlatPhysics) -> Result<Self, Self::Error> {
        let p = PhysicsParams::from_array(&f.into());
        p.validate()?;
        Ok(p)
    }
}

/// The five independently regressed parameter groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamGroup {
    Bending,
    Stretch,
    Shear,
    BucklingStiffness,
    BucklingRatio,
}

impl ParamGroup {
    pub const ALL: [ParamGroup; 5] = [
        ParamGroup::Bending,
        ParamGroup::Stretch,
        ParamGroup::Shear,
        ParamGroup::BucklingStiffness,
        ParamGroup::BucklingRatio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Bending => "bending",
            Self::Stretch => "stretch",
            Self::Shear => "shear",
            Self::BucklingStiffness => "buckling_stiffness",
            Self::BucklingRatio => "buckling_ratio",
        }
    }

    /// Indices into [`FIELD_NAMES`].
    pub fn field_indices(self) -> &'static [usize] {
        match self {
            Self::Bending => &[12, 13, 14, 15],
            Self::Stretch => &[18, 19],
            Self::Shear => &[16, 17],
            Self::BucklingStiffness => &[4, 5, 6, 7],
            Self::BucklingRatio => &[8, 9, 10, 11],
        }
    }

    pub fn target_names(self) -> Vec<String> {
        self.field_indices().iter().map(|&i| FIELD_NAMES[i].to_string()).collect()
    }

    pub fn extract(self, p: &PhysicsParams) -> Vec<f64> {
        let v = p.to_array();
        self.field_indices().iter().map(|&i| v[i]).collect()
    }
}

impl fmt::Display for ParamGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ParamGroup::ALL
            .into_iter()
            .find(|g| g.name() == s.trim())
            .ok_or_else(|| format!("unknown parameter group `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, [f64; 2]>", into = "BTreeMap<String, [f64; 2]>")]
pub struct ParamBounds {
    pub lower: [f64; FIELD_COUNT],
    pub upper: [f64; FIELD_COUNT],
}

impl ParamBounds {
    pub fn new(lower: [f64; FIELD_COUNT], upper: [f64; FIELD_COUNT]) -> Result<Self, PhysError> {
        let b = Self { lower, upper };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), PhysError> {
        for i in 0..FIELD_COUNT {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            let bad = !lo.is_finite()
                || !hi.is_finite()
                || lo > hi
                || lo < 0.0
                || (strictly_positive(i) && lo <= 0.0);
            if bad {
                return Err(PhysError::InvalidBounds { field: FIELD_NAMES[i].into(), lower: lo, upper: hi });
            }
        }
        Ok(())
    }

    /// Shipped table for use without a dataset.
    pub fn fallback() -> Self {
        serde_json::from_str(DEFAULT_BOUNDS).expect("shipped bounds table is valid")
    }

    /// Per-field `[min, max]` over the dataset widened by `margin` (relative).
    pub fn from_dataset(ds: &T2PDataset, margin: f64) -> Result<Self, PhysError> {
        if ds.is_empty() {
            return Err(PhysError::Dataset(crate::error::DatasetError::EmptyDataset));
        }
        let mut lower = [f64::INFINITY; FIELD_COUNT];
        let mut upper = [f64::NEG_INFINITY; FIELD_COUNT];
        for r in ds.records() {
            for (i, v) in r.physics.to_array().into_iter().enumerate() {
                lower[i] = lower[i].min(v);
                upper[i] = upper[i].max(v);
            }
        }
        for i in 0..FIELD_COUNT {
            lower[i] = (lower[i] - margin * lower[i].abs()).max(0.0);
            upper[i] += margin * upper[i].abs();
        }
        Self::new(lower, upper)
    }

    pub fn degenerate(p: &PhysicsParams) -> Result<Self, PhysError> {
        let v = p.to_array();
        Self::new(v, v)
    }

    pub fn contains(&self, p: &PhysicsParams) -> bool {
        p.to_array().iter().enumerate().all(|(i, &v)| v >= self.lower[i] && v <= self.upper[i])
    }
}

impl TryFrom<BTreeMap<String, [f64; 2]>> for ParamBounds {
    type Error = String;

    fn try_from(map: BTreeMap<String, [f64; 2]>) -> Result<Self, Self::Error> {
        let mut lower = [0.0; FIELD_COUNT];
        let mut upper = [0.0; FIELD_COUNT];
        for (i, name) in FIELD_NAMES.iter().enumerate() {
            let [lo, hi] = map.get(*name).ok_or_else(|| format!("bounds missing `{name}`"))?;
            lower[i] = *lo;
            upper[i] = *hi;
        }
        if let Some(extra) = map.keys().find(|k| field_index(k).is_none()) {
            return Err(format!("unknown bounds field `{extra}`"));
        }
        ParamBounds::new(lower, upper).map_err(|e| e.to_string())
    }
}

impl From<ParamBounds> for BTreeMap<String, [f64; 2]> {
    fn from(b: ParamBounds) -> Self {
        FIELD_NAMES.iter().enumerate().map(|(i, n)| (n.to_string(), [b.lower[i], b.upper[i]])).collect()
    }
}

/// Bounds derived from the dataset (10% margin), or the shipped table when no
/// dataset is available.
pub fn default_bounds(ds: Option<&T2PDataset>) -> ParamBounds {
    ds.and_then(|d| ParamBounds::from_dataset(d, 0.10).ok()).unwrap_or_else(ParamBounds::fallback)
}

/// Independent draw per field: log-uniform for stiffness fields with a
/// positive lower bound, uniform otherwise.
pub fn sample_random_physics(bounds: &ParamBounds, seed: u64) -> Result<PhysicsParams, PhysError> {
    bounds.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = [0.0; FIELD_COUNT];
    for (i, slot) in v.iter_mut().enumerate() {
        let (lo, hi) = (bounds.lower[i], bounds.upper[i]);
        // Draw unconditionally so each field consumes the same stream position.
        let u: f64 = rng.gen();
        *slot = if lo == hi {
            lo
        } else if field_kind(i) == FieldKind::Stiffness && lo > 0.0 {
            (lo.ln() + u * (hi.ln() - lo.ln())).exp().clamp(lo, hi)
        } else {
            (lo + u * (hi - lo)).clamp(lo, hi)
        };
        if strictly_positive(i) && *slot <= 0.0 {
            *slot = lo.max(f64::MIN_POSITIVE);
        }
    }
    Ok(PhysicsParams::from_array(&v))
}

/// The five group models used by [`predict_physics`].
#[derive(Debug, Clone)]
pub struct PhysicsModels {
    pub forests: BTreeMap<ParamGroup, Forest>,
}

impl PhysicsModels {
    pub fn get(&self, g: ParamGroup) -> Result<&Forest, PhysError> {
        self.forests.get(&g).ok_or_else(|| PhysError::MissingModel(g.name().into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DtMode {
    Mean,
    Median,
    Random,
    /// Select the aggregation mode by cross-validation on the dataset.
    Cv,
}

impl FromStr for DtMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(Self::Mean),
            "median" => Ok(Self::Median),
            "random" => Ok(Self::Random),
            "cv" => Ok(Self::Cv),
            _ => Err(format!("unknown density/thickness mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictConfig {
    pub friction: f64,
    pub damping: f64,
    pub dt_mode: DtMode,
    pub dt_tolerance: f64,
    pub seed: u64,
    pub cv_folds: usize,
    pub bounds_margin: f64,
}

impl Default for PredictConfig {
    fn default() -> Self {
        Self {
            friction: 0.3,
            damping: 1.0,
            dt_mode: DtMode::Mean,
            dt_tolerance: DEFAULT_PERCENT_TOLERANCE,
            seed: 0,
            cv_folds: 5,
            bounds_margin: 0.10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampEvent {
    pub field: String,
    pub raw: f64,
    pub clamped: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Present when density/thickness came from retrieval.
    pub match_level: Option<MatchLevel>,
    pub candidate_count: Option<usize>,
    pub aggregation: Option<AggregationMode>,
    pub clamp_report: Vec<ClampEvent>,
    pub model_fingerprints: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsPrediction {
    pub params: PhysicsParams,
    pub provenance: Provenance,
}

/// Clamps every field into `bounds`, reporting what moved.
pub fn clamp_to_bounds(raw: &[f64; FIELD_COUNT], bounds: &ParamBounds) -> ([f64; FIELD_COUNT], Vec<ClampEvent>) {
    let mut out = *raw;
    let mut events = Vec::new();
    for i in 0..FIELD_COUNT {
        let v = if raw[i].is_nan() { bounds.lower[i] } else { raw[i].clamp(bounds.lower[i], bounds.upper[i]) };
        if v != raw[i] || raw[i].is_nan() {
            events.push(ClampEvent { field: FIELD_NAMES[i].into(), raw: raw[i], clamped: v });
        }
        out[i] = v;
    }
    (out, events)
}

/// Assembles a full parameter set for `attrs`: stiffness groups from the
/// forests, density/thickness from the attributes (or retrieval when absent),
/// friction and damping from config, then clamps to `bounds`.
pub fn predict_physics(
    vocab: &Vocabulary,
    attrs: &FabricAttributes,
    models: &PhysicsModels,
    ds: &T2PDataset,
    bounds: &ParamBounds,
    config: &PredictConfig,
) -> Result<PhysicsPrediction, PhysError> {
    if ds.vocab_fingerprint() != vocab.fingerprint() {
        return Err(PhysError::ModelVocabMismatch("dataset".into()));
    }
    let mut fingerprints = BTreeMap::new();
    for g in ParamGroup::ALL {
        let f = models.get(g)?;
        if f.vocab_fingerprint != vocab.fingerprint() {
            return Err(PhysError::ModelVocabMismatch(g.name().into()));
        }
        fingerprints.insert(g.name().to_string(), f.train_fingerprint.clone());
    }

    let mut attrs = attrs.clone();
    let mut provenance = Provenance {
        match_level: None,
        candidate_count: None,
        aggregation: None,
        clamp_report: Vec::new(),
        model_fingerprints: fingerprints,
    };
    if attrs.density.is_none() || attrs.thickness.is_none() {
        let mode = match config.dt_mode {
            DtMode::Mean => AggregationMode::Mean,
            DtMode::Median => AggregationMode::Median,
            DtMode::Random => AggregationMode::Random,
            DtMode::Cv => {
                crate::retrieval::select_mode_cv(ds, config.cv_folds, config.seed, config.dt_tolerance)?.selected
            }
        };
        let est = estimate_density_thickness(&attrs, ds, mode, config.dt_tolerance, config.seed)?;
        attrs.density.get_or_insert(est.density);
        attrs.thickness.get_or_insert(est.thickness);
        provenance.match_level = Some(est.level);
        provenance.candidate_count = Some(est.candidate_count);
        provenance.aggregation = Some(mode);
    }

    let features = featurize(vocab, &attrs)?.to_vec();
    let mut raw = [0.0; FIELD_COUNT];
    raw[0] = attrs.density.unwrap_or_default();
    raw[1] = attrs.thickness.unwrap_or_default();
    raw[2] = config.friction;
    raw[3] = config.damping;
    for g in ParamGroup::ALL {
        let out = models.get(g)?.predict(&features)?;
        for (&i, v) in g.field_indices().iter().zip(out) {
            raw[i] = v;
        }
    }
    let (clamped, events) = clamp_to_bounds(&raw, bounds);
    provenance.clamp_report = events;
    Ok(PhysicsPrediction { params: PhysicsParams::from_array(&clamped), provenance })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_params() -> PhysicsParams {
        let mut v = [0.0; FIELD_COUNT];
        for (i, x) in v.iter_mut().enumerate() {
            *x = 1.0 + i as f64;
        }
        PhysicsParams::from_array(&v)
    }

    #[test]
    fn array_roundtrip_and_names() {
        let p = sample_params();
        assert_eq!(PhysicsParams::from_array(&p.to_array()), p);
        let json = serde_json::to_value(p).unwrap();
        let obj = json.as_object().unwrap();
        assert_eq!(obj.len(), FIELD_COUNT);
        for (i, name) in FIELD_NAMES.iter().enumerate() {
            assert_eq!(obj[*name].as_f64().unwrap(), 1.0 + i as f64);
        }
        let back: PhysicsParams = serde_json::from_value(json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn invariants() {
        assert!(sample_params().validate().is_ok());
        let mut p = sample_params();
        p.density = 0.0;
        assert!(p.validate().is_err());
        let mut p = sample_params();
        p.friction = 0.0;
        assert!(p.validate().is_ok());
        p.shear_stiffness.left = -1.0;
        assert!(p.validate().is_err());
        let mut p = sample_params();
        p.bending_stiffness.warp = f64::NAN;
        assert!(p.validate().is_err());
    }

    #[test]
    fn groups_cover_stiffness_fields_once() {
        let mut seen: Vec<usize> = ParamGroup::ALL.iter().flat_map(|g| g.field_indices().to_vec()).collect();
        seen.sort();
        assert_eq!(seen, (4..20).collect::<Vec<_>>());
        assert_eq!("buckling_ratio".parse::<ParamGroup>().unwrap(), ParamGroup::BucklingRatio);
    }

    #[test]
    fn degenerate_bounds_reproduce_exactly() {
        let p = sample_params();
        let b = ParamBounds::degenerate(&p).unwrap();
        for seed in 0..10 {
            assert_eq!(sample_random_physics(&b, seed).unwrap(), p);
        }
    }

    #[test]
    fn sampling_is_contained_and_deterministic() {
        let b = ParamBounds::fallback();
        for seed in 0..1000 {
            let p = sample_random_physics(&b, seed).unwrap();
            assert!(b.contains(&p), "seed {seed}");
            assert!(p.validate().is_ok());
        }
        assert_eq!(sample_random_physics(&b, 7).unwrap(), sample_random_physics(&b, 7).unwrap());
        assert_ne!(sample_random_physics(&b, 7).unwrap(), sample_random_physics(&b, 8).unwrap());
    }

    #[test]
    fn stiffness_sampling_is_log_uniform() {
        let b = ParamBounds::fallback();
        // bend_warp spans [1, 1e6]; log-uniform puts half the mass below 1e3.
        let below = (0..2000)
            .filter(|&s| sample_random_physics(&b, s).unwrap().bending_stiffness.warp < 1e3)
            .count();
        assert!((850..1150).contains(&below), "{below}");
    }

    #[test]
    fn invalid_bounds_rejected() {
        let mut b = ParamBounds::fallback();
        b.lower[5] = 10.0;
        b.upper[5] = 1.0;
        assert!(matches!(sample_random_physics(&b, 0), Err(PhysError::InvalidBounds { .. })));
        let mut b = ParamBounds::fallback();
        b.lower[0] = 0.0;
        assert!(b.validate().is_err());
    }

    #[test]
    fn fallback_table_loads() {
        let b = ParamBounds::fallback();
        assert!(b.validate().is_ok());
        assert_eq!(default_bounds(None), b);
    }

    #[test]
    fn clamp_reports_changes() {
        let b = ParamBounds::fallback();
        let mut raw = sample_params().to_array();
        raw[0] = 100.0;
        raw[1] = 1.0;
        raw[2] = 0.5;
        raw[3] = 1.0;
        raw[12] = -0.1;
        raw[18] = 1000.0;
        raw[19] = 1000.0;
        let (out, events) = clamp_to_bounds(&raw, &b);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].field, "bend_bias_l");
        assert_eq!(out[12], b.lower[12]);
    }
}
