//! Evaluation metrics: material sets, percentages, categorical labels,
//! continuous scalars, drape geometry and the weighted token loss.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::MetricError;
use crate::tagparse::FiberComposition;

/// Chamfer values are reported in metres times this factor.
pub const CHAMFER_REPORT_SCALE: f64 = 1e4;
/// Default voxel edge for IoU, in millimetres.
pub const DEFAULT_VOXEL_MM: f64 = 50.0;

pub type Point = [f64; 3];

fn same_len(a: usize, b: usize) -> Result<(), MetricError> {
    if a != b {
        return Err(MetricError::LengthMismatch(a, b));
    }
    if a == 0 {
        return Err(MetricError::Empty);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl SetCounts {
    pub fn accuracy(&self) -> f64 {
        let d = self.tp + self.fp + self.fn_;
        if d == 0 {
            0.0
        } else {
            self.tp as f64 / d as f64
        }
    }

    /// Harmonic mean of precision and recall; 0 when undefined.
    pub fn f1(&self) -> f64 {
        let d = 2 * self.tp + self.fp + self.fn_;
        if self.tp == 0 || d == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / d as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSetScore {
    pub accuracy: f64,
    pub f1: f64,
    pub per_example: Vec<SetCounts>,
}

pub fn material_set_score(gt: &[FiberComposition], pred: &[FiberComposition]) -> Result<MaterialSetScore, MetricError> {
    same_len(gt.len(), pred.len())?;
    let per_example: Vec<SetCounts> = gt
        .iter()
        .zip(pred)
        .map(|(g, p)| {
            let (g, p) = (g.fiber_set(), p.fiber_set());
            SetCounts {
                tp: g.intersection(&p).count(),
                fp: p.difference(&g).count(),
                fn_: g.difference(&p).count(),
            }
        })
        .collect();
    let n = per_example.len() as f64;
    Ok(MaterialSetScore {
        accuracy: per_example.iter().map(SetCounts::accuracy).sum::<f64>() / n,
        f1: per_example.iter().map(SetCounts::f1).sum::<f64>() / n,
        per_example,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentageErrorScore {
    pub mae: f64,
    pub nmae: f64,
}

/// Per-example errors over the union of fibers (absent fibers count as 0%).
pub fn percentage_error_one(gt: &FiberComposition, pred: &FiberComposition) -> PercentageErrorScore {
    let union: BTreeSet<_> = gt.entries().iter().chain(pred.entries()).map(|s| &s.fiber).collect();
    let (mut abs, mut norm) = (0.0, 0.0);
    for f in &union {
        let (a, b) = (gt.percent_of(f), pred.percent_of(f));
        abs += (a - b).abs();
        norm += (a - b).abs() / a.max(b);
    }
    let m = union.len() as f64;
    PercentageErrorScore { mae: abs / m, nmae: norm / m }
}

pub fn percentage_error(gt: &[FiberComposition], pred: &[FiberComposition]) -> Result<PercentageErrorScore, MetricError> {
    same_len(gt.len(), pred.len())?;
    let n = gt.len() as f64;
    let (mae, nmae) = gt.iter().zip(pred).map(|(g, p)| percentage_error_one(g, p)).fold((0.0, 0.0), |acc, s| {
        (acc.0 + s.mae, acc.1 + s.nmae)
    });
    Ok(PercentageErrorScore { mae: mae / n, nmae: nmae / n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalScore {
    pub accuracy: f64,
    pub macro_f1: f64,
    /// F1 of every class present in the ground truth or the predictions.
    pub per_class: BTreeMap<String, f64>,
}

pub fn categorical_scores<S: AsRef<str>>(gt: &[S], pred: &[S], classes: &[S]) -> Result<CategoricalScore, MetricError> {
    same_len(gt.len(), pred.len())?;
    let classes: HashSet<&str> = classes.iter().map(AsRef::as_ref).collect();
    for label in gt.iter().chain(pred) {
        if !classes.contains(label.as_ref()) {
            return Err(MetricError::UnknownLabel(label.as_ref().to_string()));
        }
    }
    let mut counts: BTreeMap<&str, SetCounts> = BTreeMap::new();
    let mut correct = 0;
    for (g, p) in gt.iter().zip(pred) {
        let (g, p) = (g.as_ref(), p.as_ref());
        if g == p {
            correct += 1;
            counts.entry(g).or_insert(SetCounts { tp: 0, fp: 0, fn_: 0 }).tp += 1;
        } else {
            counts.entry(g).or_insert(SetCounts { tp: 0, fp: 0, fn_: 0 }).fn_ += 1;
            counts.entry(p).or_insert(SetCounts { tp: 0, fp: 0, fn_: 0 }).fp += 1;
        }
    }
    let per_class: BTreeMap<String, f64> = counts.iter().map(|(c, k)| (c.to_string(), k.f1())).collect();
    Ok(CategoricalScore {
        accuracy: correct as f64 / gt.len() as f64,
        macro_f1: per_class.values().sum::<f64>() / per_class.len() as f64,
        per_class,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousError {
    pub mae: f64,
    /// Absent when the ground truth has zero range.
    pub nmae: Option<f64>,
}

impl ContinuousError {
    pub fn nmae(&self) -> Result<f64, MetricError> {
        self.nmae.ok_or(MetricError::ZeroRange)
    }
}

pub fn continuous_error(gt: &[f64], pred: &[f64]) -> Result<ContinuousError, MetricError> {
    same_len(gt.len(), pred.len())?;
    if gt.iter().chain(pred).any(|v| !v.is_finite()) {
        return Err(MetricError::Invalid("non-finite value".into()));
    }
    let mae = gt.iter().zip(pred).map(|(a, b)| (a - b).abs()).sum::<f64>() / gt.len() as f64;
    let lo = gt.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gt.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ContinuousError { mae, nmae: (hi > lo).then(|| mae / (hi - lo)) })
}

fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn mean_nearest(from: &[Point], to: &[Point]) -> f64 {
    from.iter()
        .map(|p| to.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
        .sum::<f64>()
        / from.len() as f64
}

/// Symmetric Chamfer distance: the two directed mean nearest-neighbour
/// distances, averaged. Same units as the input.
pub fn chamfer(a: &[Point], b: &[Point]) -> Result<f64, MetricError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptyCloud);
    }
    Ok(0.5 * (mean_nearest(a, b) + mean_nearest(b, a)))
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TriMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn translated(&self, d: Point) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| [v[0] + d[0], v[1] + d[1], v[2] + d[2]]).collect(),
            triangles: self.triangles.clone(),
        }
    }

    fn corners(&self, t: &[usize; 3]) -> [Point; 3] {
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    fn validate(&self) -> Result<(), MetricError> {
        if self.triangles.is_empty() {
            return Err(MetricError::EmptyMesh);
        }
        if self.triangles.iter().flatten().any(|&i| i >= self.vertices.len()) {
            return Err(MetricError::Invalid("triangle index out of range".into()));
        }
        if self.vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(MetricError::Invalid("non-finite vertex".into()));
        }
        Ok(())
    }
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: Point, b: Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Separating-axis test between a triangle and a closed axis-aligned box.
/// Touching counts as overlap.
pub fn triangle_box_overlap(tri: &[Point; 3], center: Point, half: Point) -> bool {
    let v = [sub(tri[0], center), sub(tri[1], center), sub(tri[2], center)];
    let e = [sub(v[1], v[0]), sub(v[2], v[1]), sub(v[0], v[2])];
    let separated = |axis: Point| -> bool {
        let p = [dot(v[0], axis), dot(v[1], axis), dot(v[2], axis)];
        let r = half[0] * axis[0].abs() + half[1] * axis[1].abs() + half[2] * axis[2].abs();
        let (lo, hi) = (p[0].min(p[1]).min(p[2]), p[0].max(p[1]).max(p[2]));
        lo > r || hi < -r
    };
    for k in 0..3 {
        let mut axis = [0.0; 3];
        axis[k] = 1.0;
        if separated(axis) {
            return false;
        }
    }
    for edge in e {
        for k in 0..3 {
            let mut unit = [0.0; 3];
            unit[k] = 1.0;
            if separated(cross(unit, edge)) {
                return false;
            }
        }
    }
    !separated(cross(e[0], e[1]))
}

/// Voxel indices touched by any triangle of `mesh` on a grid with the given
/// origin, edge and dimensions.
pub fn occupancy(mesh: &TriMesh, origin: Point, voxel: f64, dims: [usize; 3]) -> BTreeSet<[usize; 3]> {
    let mut occ = BTreeSet::new();
    let half = [voxel / 2.0; 3];
    for t in &mesh.triangles {
        let c = mesh.corners(t);
        let mut range = [(0usize, 0usize); 3];
        for k in 0..3 {
            let lo = c.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
            let hi = c.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
            let a = ((lo - origin[k]) / voxel).floor() as i64 - 1;
            let b = ((hi - origin[k]) / voxel).floor() as i64 + 1;
            range[k] = (a.max(0) as usize, (b.max(0) as usize).min(dims[k] - 1));
        }
        for i in range[0].0..=range[0].1 {
            for j in range[1].0..=range[1].1 {
                for l in range[2].0..=range[2].1 {
                    let center = [
                        origin[0] + (i as f64 + 0.5) * voxel,
                        origin[1] + (j as f64 + 0.5) * voxel,
                        origin[2] + (l as f64 + 0.5) * voxel,
                    ];
                    if triangle_box_overlap(&c, center, half) {
                        occ.insert([i, j, l]);
                    }
                }
            }
        }
    }
    occ
}

/// Grid anchored at the joint bounding-box minimum of both meshes.
pub fn joint_grid(a: &TriMesh, b: &TriMesh, voxel: f64) -> (Point, [usize; 3]) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in a.vertices.iter().chain(&b.vertices) {
        for k in 0..3 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    let dims = [0, 1, 2].map(|k| ((hi[k] - lo[k]) / voxel).floor() as usize + 1);
    (lo, dims)
}

/// Intersection over union of surface voxel occupancy.
pub fn voxel_iou(a: &TriMesh, b: &TriMesh, voxel: f64) -> Result<f64, MetricError> {
    a.validate()?;
    b.validate()?;
    if !(voxel > 0.0 && voxel.is_finite()) {
        return Err(MetricError::Invalid(format!("voxel size {voxel}")));
    }
    let (origin, dims) = joint_grid(a, b, voxel);
    let oa = occupancy(a, origin, voxel, dims);
    let ob = occupancy(b, origin, voxel, dims);
    let inter = oa.intersection(&ob).count();
    let union = oa.union(&ob).count();
    Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryScore {
    /// Metres times [`CHAMFER_REPORT_SCALE`].
    pub chamfer: f64,
    pub iou: f64,
}

/// Chamfer over mesh vertices and voxel IoU for meshes given in millimetres.
pub fn geometry_score(a: &TriMesh, b: &TriMesh, voxel_mm: f64) -> Result<GeometryScore, MetricError> {
    let c = chamfer(&a.vertices, &b.vertices)?;
    Ok(GeometryScore { chamfer: c / 1000.0 * CHAMFER_REPORT_SCALE, iou: voxel_iou(a, b, voxel_mm)? })
}

/// `-sum_i w[t_i] ln p_i`; probabilities must lie in (0, 1].
pub fn weighted_cross_entropy(token_probs: &[f64], targets: &[usize], weights: &[f64]) -> Result<f64, MetricError> {
    if token_probs.len() != targets.len() {
        return Err(MetricError::LengthMismatch(token_probs.len(), targets.len()));
    }
    let mut loss = 0.0;
    for (i, (&p, &t)) in token_probs.iter().zip(targets).enumerate() {
        if !(p > 0.0 && p <= 1.0) {
            return Err(MetricError::ZeroProbability(i));
        }
        let w = *weights
            .get(t)
            .ok_or_else(|| MetricError::Invalid(format!("target {t} has no weight")))?;
        if !(w >= 0.0 && w.is_finite()) {
            return Err(MetricError::Invalid(format!("weight {w} for class {t}")));
        }
        loss -= w * p.ln();
    }
    Ok(loss)
}

/// `total / (classes * count_c)` for every class.
pub fn inverse_frequency_weights<K: Ord + Clone + std::fmt::Display>(counts: &BTreeMap<K, u64>) -> Result<BTreeMap<K, f64>, MetricError> {
    if counts.is_empty() {
        return Err(MetricError::Empty);
    }
    if let Some((c, _)) = counts.iter().find(|(_, &n)| n == 0) {
        return Err(MetricError::ZeroCount(c.to_string()));
    }
    let total: u64 = counts.values().sum();
    let k = counts.len() as f64;
    Ok(counts.iter().map(|(c, &n)| (c.clone(), total as f64 / (k * n as f64))).collect())
}
