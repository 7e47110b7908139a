//! Mass-spring cloth on a regular particle grid, integrated with
//! semi-implicit Euler. Units are mm, g and s throughout.
//!
//! Warp runs along grid rows (index `j`), weft along columns (index `i`).
//! The left bias diagonal joins `(i, j)` to `(i + 1, j + 1)`, the right bias
//! diagonal joins `(i + 1, j)` to `(i, j + 1)`.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::metrics::{Point, TriMesh};
use crate::physmap::PhysicsParams;

pub const DEFAULT_SPACING_MM: f64 = 20.0;
pub const DEFAULT_FRAME_DT: f64 = 0.042;
pub const DEFAULT_GRAVITY: f64 = 9800.0;
pub const DEFAULT_AIR_DAMPING: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Grid in the x-y plane; rows advance along +y.
    #[default]
    Horizontal,
    /// Grid in the x-z plane; rows advance along -z.
    Vertical,
}

fn default_spacing() -> f64 {
    DEFAULT_SPACING_MM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClothSpec {
    pub width: f64,
    pub height: f64,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    /// Pins every particle of row 0.
    #[serde(default)]
    pub pin_top_edge: bool,
    /// Extra pinned particles as `[column, row]`.
    #[serde(default)]
    pub pinned: Vec<[usize; 2]>,
    #[serde(default)]
    pub origin: Point,
    #[serde(default)]
    pub orientation: Orientation,
}

impl ClothSpec {
    pub fn new(width: f64, height: f64, spacing: f64) -> Self {
        Self {
            width,
            height,
            spacing,
            pin_top_edge: false,
            pinned: Vec::new(),
            origin: [0.0; 3],
            orientation: Orientation::Horizontal,
        }
    }

    /// Columns and rows of particles.
    pub fn grid(&self) -> Result<(usize, usize), SimError> {
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(SimError::InvalidSpec(format!("spacing {}", self.spacing)));
        }
        let cells = |len: f64, name: &str| -> Result<usize, SimError> {
            let c = len / self.spacing;
            if !(len > 0.0 && c.is_finite()) || (c - c.round()).abs() > 1e-9 * c.max(1.0) || c.round() < 1.0 {
                return Err(SimError::InvalidSpec(format!("{name} {len} is not a positive multiple of {}", self.spacing)));
            }
            Ok(c.round() as usize)
        };
        Ok((cells(self.width, "width")? + 1, cells(self.height, "height")? + 1))
    }

    pub fn pinned_indices(&self) -> Result<Vec<usize>, SimError> {
        let (nx, ny) = self.grid()?;
        let mut out: Vec<usize> = if self.pin_top_edge { (0..nx).collect() } else { Vec::new() };
        for &[i, j] in &self.pinned {
            if i >= nx || j >= ny {
                return Err(SimError::InvalidSpec(format!("pinned particle [{i}, {j}] outside {nx}x{ny} grid")));
            }
            out.push(j * nx + i);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

fn default_frame_dt() -> f64 {
    DEFAULT_FRAME_DT
}
fn default_gravity() -> f64 {
    DEFAULT_GRAVITY
}
fn default_air() -> f64 {
    DEFAULT_AIR_DAMPING
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_frame_dt")]
    pub frame_dt: f64,
    /// Chosen from the stability limit when absent.
    #[serde(default)]
    pub substeps: Option<usize>,
    /// Magnitude of gravity along -z, mm/s^2.
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    #[serde(default = "default_air")]
    pub air_damping: f64,
    /// Height of a ground plane, if any.
    #[serde(default)]
    pub ground: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            frame_dt: DEFAULT_FRAME_DT,
            substeps: None,
            gravity: DEFAULT_GRAVITY,
            air_damping: DEFAULT_AIR_DAMPING,
            ground: None,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<(), SimError> {
        if !(self.frame_dt > 0.0 && self.frame_dt.is_finite()) {
            return Err(SimError::InvalidSpec(format!("frame_dt {}", self.frame_dt)));
        }
        if self.substeps == Some(0) {
            return Err(SimError::InvalidSpec("substeps must be at least 1".into()));
        }
        if !self.gravity.is_finite() || !(self.air_damping >= 0.0 && self.air_damping.is_finite()) {
            return Err(SimError::InvalidSpec("gravity and air damping must be finite, damping >= 0".into()));
        }
        Ok(())
    }
}

/// Below `threshold` length the element stiffens (or softens) to `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Buckling {
    pub threshold: f64,
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub a: usize,
    pub b: usize,
    pub rest: f64,
    pub k: f64,
    pub buckling: Option<Buckling>,
}

impl Element {
    /// Tension along the element (positive pulls the ends together).
    pub fn tension(&self, len: f64) -> f64 {
        match self.buckling {
            Some(b) if len < b.threshold => self.k * (b.threshold - self.rest) + b.k * (len - b.threshold),
            _ => self.k * (len - self.rest),
        }
    }

    pub fn energy(&self, len: f64) -> f64 {
        match self.buckling {
            Some(b) if len < b.threshold => {
                let at = b.threshold - self.rest;
                let d = len - b.threshold;
                0.5 * self.k * at * at + self.k * at * d + 0.5 * b.k * d * d
            }
            _ => 0.5 * self.k * (len - self.rest).powi(2),
        }
    }

    fn k_max(&self) -> f64 {
        self.buckling.map_or(self.k, |b| b.k.max(self.k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub positions: Vec<Point>,
    pub velocities: Vec<Point>,
    pub masses: Vec<f64>,
    pub pinned: Vec<bool>,
    /// Warp edges first, then weft edges.
    pub stretch: Vec<Element>,
    /// Left diagonals first, then right diagonals.
    pub shear: Vec<Element>,
    /// Second neighbours along warp, then along weft.
    pub bend: Vec<Element>,
    /// Second neighbours along each bias diagonal.
    pub bias_bend: Vec<Element>,
    pub faces: Vec<[usize; 3]>,
    pub time: f64,
    pub steps: usize,
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: Point) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

impl SimState {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.stretch.iter().chain(&self.shear).chain(&self.bend).chain(&self.bias_bend)
    }

    fn check(&self) -> Result<(), SimError> {
        let n = self.positions.len();
        if n == 0 || self.velocities.len() != n || self.masses.len() != n || self.pinned.len() != n {
            return Err(SimError::InvalidSpec("inconsistent particle arrays".into()));
        }
        if self.masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(SimError::InvalidSpec("particle masses must be positive".into()));
        }
        if self.elements().any(|e| e.a >= n || e.b >= n || !(e.rest > 0.0) || !(e.k >= 0.0)) {
            return Err(SimError::InvalidSpec("element table is invalid".into()));
        }
        Ok(())
    }

    /// Largest stable time step for this state under `config` and the
    /// internal damping coefficient.
    pub fn stability_limit(&self, config: &SimConfig, internal_damping: f64) -> f64 {
        let n = self.len();
        let mut stiff = vec![0.0; n];
        let mut count = vec![0usize; n];
        let mut k_max: f64 = 0.0;
        for e in self.elements() {
            let k = e.k_max();
            stiff[e.a] += k;
            stiff[e.b] += k;
            count[e.a] += 1;
            count[e.b] += 1;
            k_max = k_max.max(k);
        }
        let m_min = self.masses.iter().copied().fold(f64::INFINITY, f64::min);
        let mut limit = f64::INFINITY;
        if k_max > 0.0 {
            limit = 0.5 * (m_min / k_max).sqrt();
        }
        for i in (0..n).filter(|&i| !self.pinned[i]) {
            if stiff[i] > 0.0 {
                limit = limit.min(0.5 * (self.masses[i] / stiff[i]).sqrt());
            }
            let damp = config.air_damping + internal_damping * count[i] as f64;
            if damp > 0.0 {
                limit = limit.min(self.masses[i] / damp);
            }
        }
        limit
    }

    /// Forces except gravity, which is applied as an acceleration.
    fn forces(&self, config: &SimConfig, internal_damping: f64) -> Vec<Point> {
        let mut f: Vec<Point> = self.velocities.iter().map(|v| v.map(|c| -config.air_damping * c)).collect();
        for e in self.elements() {
            let d = sub(self.positions[e.b], self.positions[e.a]);
            let len = norm(d);
            if len <= 1e-12 {
                continue;
            }
            let u = [d[0] / len, d[1] / len, d[2] / len];
            let dv = sub(self.velocities[e.b], self.velocities[e.a]);
            let rel = dv[0] * u[0] + dv[1] * u[1] + dv[2] * u[2];
            let mag = e.tension(len) + internal_damping * rel;
            for k in 0..3 {
                f[e.a][k] += mag * u[k];
                f[e.b][k] -= mag * u[k];
            }
        }
        f
    }

    /// Kinetic plus elastic plus gravitational energy (zero at z = 0).
    pub fn energy(&self, config: &SimConfig) -> f64 {
        let kinetic: f64 = self
            .masses
            .iter()
            .zip(&self.velocities)
            .map(|(m, v)| 0.5 * m * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]))
            .sum();
        let elastic: f64 =
            self.elements().map(|e| e.energy(norm(sub(self.positions[e.b], self.positions[e.a])))).sum();
        let potential: f64 = self.masses.iter().zip(&self.positions).map(|(m, p)| m * config.gravity * p[2]).sum();
        kinetic + elastic + potential
    }

    /// Mean |length - rest| / rest over the stretch edges.
    pub fn mean_stretch_strain(&self) -> f64 {
        self.stretch
            .iter()
            .map(|e| (norm(sub(self.positions[e.b], self.positions[e.a])) - e.rest).abs() / e.rest)
            .sum::<f64>()
            / self.stretch.len().max(1) as f64
    }

    pub fn mesh(&self) -> TriMesh {
        TriMesh { vertices: self.positions.clone(), triangles: self.faces.clone() }
    }
}

fn stretch_k(params: &PhysicsParams, warp: bool) -> f64 {
    // Square cells: perpendicular spacing over rest length is 1.
    if warp {
        params.stretch_stiffness.warp
    } else {
        params.stretch_stiffness.weft
    }
}

fn buckling(ratio: f64, stiffness: f64, rest: f64, scale: f64) -> Option<Buckling> {
    Some(Buckling { threshold: (ratio / 100.0).clamp(0.0, 1.0) * rest, k: stiffness / scale })
}

/// Builds the particle grid and its element tables for `params`.
pub fn build_cloth(spec: &ClothSpec, params: &PhysicsParams) -> Result<SimState, SimError> {
    let (nx, ny) = spec.grid()?;
    let pinned_idx = spec.pinned_indices()?;
    params.validate().map_err(|e| SimError::InvalidParams(e.to_string()))?;
    let s = spec.spacing;
    let n = nx * ny;
    let idx = |i: usize, j: usize| j * nx + i;

    let cell_mass = params.density * (s / 1000.0).powi(2);
    let mut positions = Vec::with_capacity(n);
    let mut masses = Vec::with_capacity(n);
    for j in 0..ny {
        for i in 0..nx {
            let (u, v) = (i as f64 * s, j as f64 * s);
            let p = match spec.orientation {
                Orientation::Horizontal => [spec.origin[0] + u, spec.origin[1] + v, spec.origin[2]],
                Orientation::Vertical => [spec.origin[0] + u, spec.origin[1], spec.origin[2] - v],
            };
            positions.push(p);
            let fx = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
            let fy = if j == 0 || j == ny - 1 { 0.5 } else { 1.0 };
            masses.push(cell_mass * fx * fy);
        }
    }
    let mut pinned = vec![false; n];
    for p in pinned_idx {
        pinned[p] = true;
    }

    let element = |a: usize, b: usize, k: f64, buckle: Option<Buckling>| Element {
        a,
        b,
        rest: norm(sub(positions[b], positions[a])),
        k,
        buckling: buckle,
    };

    let mut stretch = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx {
            stretch.push(element(idx(i, j), idx(i, j + 1), stretch_k(params, true), None));
        }
    }
    for j in 0..ny {
        for i in 0..nx - 1 {
            stretch.push(element(idx(i, j), idx(i + 1, j), stretch_k(params, false), None));
        }
    }

    let mut shear = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            shear.push(element(idx(i, j), idx(i + 1, j + 1), params.shear_stiffness.left, None));
        }
    }
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            shear.push(element(idx(i + 1, j), idx(i, j + 1), params.shear_stiffness.right, None));
        }
    }

    let (bs, br, bk) = (&params.bending_stiffness, &params.buckling_ratio, &params.buckling_stiffness);
    let axis_scale = s * s;
    let mut bend = Vec::new();
    for j in 0..ny.saturating_sub(2) {
        for i in 0..nx {
            let rest = 2.0 * s;
            bend.push(element(idx(i, j), idx(i, j + 2), bs.warp / axis_scale, buckling(br.warp, bk.warp, rest, axis_scale)));
        }
    }
    for j in 0..ny {
        for i in 0..nx.saturating_sub(2) {
            let rest = 2.0 * s;
            bend.push(element(idx(i, j), idx(i + 2, j), bs.weft / axis_scale, buckling(br.weft, bk.weft, rest, axis_scale)));
        }
    }

    let bias_scale = 2.0 * s * s;
    let bias_rest = 2.0 * s * 2f64.sqrt();
    let mut bias_bend = Vec::new();
    for j in 0..ny.saturating_sub(2) {
        for i in 0..nx.saturating_sub(2) {
            bias_bend.push(element(
                idx(i, j),
                idx(i + 2, j + 2),
                bs.bias_l / bias_scale,
                buckling(br.bias_l, bk.bias_l, bias_rest, bias_scale),
            ));
        }
    }
    for j in 0..ny.saturating_sub(2) {
        for i in 0..nx.saturating_sub(2) {
            bias_bend.push(element(
                idx(i + 2, j),
                idx(i, j + 2),
                bs.bias_r / bias_scale,
                buckling(br.bias_r, bk.bias_r, bias_rest, bias_scale),
            ));
        }
    }

    let mut faces = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let (p00, p10, p01, p11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            faces.push([p00, p10, p11]);
            faces.push([p00, p11, p01]);
        }
    }

    Ok(SimState {
        velocities: vec![[0.0; 3]; n],
        positions,
        masses,
        pinned,
        stretch,
        shear,
        bend,
        bias_bend,
        faces,
        time: 0.0,
        steps: 0,
    })
}

/// Advances `state` by one step of length `dt`.
pub fn step(state: &mut SimState, config: &SimConfig, params: &PhysicsParams, dt: f64) -> Result<(), SimError> {
    config.validate()?;
    state.check()?;
    let limit = state.stability_limit(config, params.internal_damping);
    if !(dt > 0.0) || dt > limit {
        return Err(SimError::UnstableConfig { dt, limit });
    }
    advance(state, config, params, dt)
}

fn advance(state: &mut SimState, config: &SimConfig, params: &PhysicsParams, dt: f64) -> Result<(), SimError> {
    let forces = state.forces(config, params.internal_damping);
    for i in 0..state.len() {
        if state.pinned[i] {
            state.velocities[i] = [0.0; 3];
            continue;
        }
        let m = state.masses[i];
        let (v, x) = (&mut state.velocities[i], &mut state.positions[i]);
        let gravity = [0.0, 0.0, config.gravity];
        for k in 0..3 {
            v[k] += dt * (forces[i][k] / m - gravity[k]);
            x[k] += dt * v[k];
        }
        if let Some(ground) = config.ground {
            if x[2] < ground {
                x[2] = ground;
                if v[2] < 0.0 {
                    let dvn = -v[2];
                    v[2] = 0.0;
                    let vt = (v[0] * v[0] + v[1] * v[1]).sqrt();
                    if vt > 0.0 {
                        let keep = (1.0 - params.friction * dvn / vt).max(0.0);
                        v[0] *= keep;
                        v[1] *= keep;
                    }
                }
            }
        }
    }
    state.steps += 1;
    state.time += dt;
    if state.positions.iter().chain(&state.velocities).flatten().any(|c| !c.is_finite()) {
        return Err(SimError::NumericalBlowup(state.steps));
    }
    Ok(())
}

/// Substeps per frame: the configured count, or the fewest that satisfy
/// the stability limit.
pub fn resolve_substeps(state: &SimState, config: &SimConfig, params: &PhysicsParams) -> Result<usize, SimError> {
    config.validate()?;
    let limit = state.stability_limit(config, params.internal_damping);
    let n = match config.substeps {
        Some(n) => n,
        None => ((config.frame_dt / limit) * (1.0 + 1e-12)).ceil().max(1.0) as usize,
    };
    let dt = config.frame_dt / n as f64;
    if dt > limit {
        return Err(SimError::UnstableConfig { dt, limit });
    }
    Ok(n)
}

/// Number of snapshots for a run of `duration` seconds, including t = 0.
pub fn frame_count(duration: f64, frame_dt: f64) -> usize {
    (duration / frame_dt + 1e-9).floor() as usize + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub frames: Vec<Vec<Point>>,
    pub faces: Vec<[usize; 3]>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn mesh(&self, frame: usize) -> TriMesh {
        TriMesh { vertices: self.frames[frame].clone(), triangles: self.faces.clone() }
    }

    pub fn last(&self) -> Option<&[Point]> {
        self.frames.last().map(Vec::as_slice)
    }

    /// Mean particle speed between consecutive frames.
    pub fn mean_speeds(&self) -> Vec<f64> {
        self.frames
            .windows(2)
            .zip(self.times.windows(2))
            .map(|(f, t)| {
                let dt = t[1] - t[0];
                f[0].iter().zip(&f[1]).map(|(a, b)| norm(sub(*b, *a)) / dt).sum::<f64>() / f[0].len() as f64
            })
            .collect()
    }
}

/// Runs an existing state forward, recording every frame boundary.
pub fn run(state: &mut SimState, params: &PhysicsParams, config: &SimConfig, duration: f64) -> Result<Trajectory, SimError> {
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(SimError::InvalidSpec(format!("duration {duration}")));
    }
    state.check()?;
    let substeps = resolve_substeps(state, config, params)?;
    let dt = config.frame_dt / substeps as f64;
    let frames = frame_count(duration, config.frame_dt);
    let start = state.time;
    let mut traj = Trajectory {
        times: vec![start],
        frames: vec![state.positions.clone()],
        faces: state.faces.clone(),
    };
    for f in 1..frames {
        for _ in 0..substeps {
            advance(state, config, params, dt)?;
        }
        state.time = start + f as f64 * config.frame_dt;
        traj.times.push(state.time);
        traj.frames.push(state.positions.clone());
    }
    Ok(traj)
}

pub fn simulate(spec: &ClothSpec, params: &PhysicsParams, config: &SimConfig, duration: f64) -> Result<Trajectory, SimError> {
    let mut state = build_cloth(spec, params)?;
    run(&mut state, params, config, duration)
}

/// Simulation input file: cloth, solver settings, duration and optional
/// inline parameters (callers may supply parameters separately).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub cloth: ClothSpec,
    #[serde(default)]
    pub config: SimConfig,
    pub duration: f64,
    #[serde(default)]
    pub params: Option<PhysicsParams>,
    /// Path of a parameter document, relative to the scenario file.
    #[serde(default)]
    pub params_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryFormat {
    ObjSequence,
    Json,
}

impl FromStr for TrajectoryFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "obj" | "obj-sequence" => Ok(Self::ObjSequence),
            "json" => Ok(Self::Json),
            _ => Err(format!("unknown trajectory format `{s}`")),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SimError + '_ {
    move |source| SimError::Io { path: path.display().to_string(), source }
}

pub fn frame_file_name(frame: usize) -> String {
    format!("frame_{frame:05}.obj")
}

pub fn frame_to_obj(time: f64, positions: &[Point], faces: &[[usize; 3]]) -> String {
    let mut out = format!("# t {time}\n");
    for p in positions {
        out.push_str(&format!("v {} {} {}\n", p[0], p[1], p[2]));
    }
    for f in faces {
        out.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    out
}

/// Writes one OBJ per frame into the directory `path`, or one JSON file.
pub fn export_trajectory(traj: &Trajectory, path: &Path, format: TrajectoryFormat) -> Result<Vec<PathBuf>, SimError> {
    if traj.is_empty() {
        return Err(SimError::EmptyTrajectory);
    }
    match format {
        TrajectoryFormat::Json => {
            let text = serde_json::to_string(traj).map_err(|e| SimError::Format(e.to_string()))?;
            fs::write(path, text).map_err(io_err(path))?;
            Ok(vec![path.to_path_buf()])
        }
        TrajectoryFormat::ObjSequence => {
            fs::create_dir_all(path).map_err(io_err(path))?;
            let mut written = Vec::with_capacity(traj.len());
            for (f, (t, frame)) in traj.times.iter().zip(&traj.frames).enumerate() {
                let file = path.join(frame_file_name(f));
                fs::write(&file, frame_to_obj(*t, frame, &traj.faces)).map_err(io_err(&file))?;
                written.push(file);
            }
            Ok(written)
        }
    }
}

/// Parses one OBJ frame: optional `# t` time, vertices and triangle faces.
pub fn parse_obj(text: &str) -> Result<(Option<f64>, Vec<Point>, Vec<[usize; 3]>), SimError> {
    let mut time = None;
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let bad = || SimError::Format(format!("line {}: `{line}`", n + 1));
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("#") => {
                if parts.next() == Some("t") {
                    time = Some(parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?);
                }
            }
            Some("v") => {
                let c: Vec<f64> = parts.map(|s| s.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
                if c.len() < 3 {
                    return Err(bad());
                }
                verts.push([c[0], c[1], c[2]]);
            }
            Some("f") => {
                let idx: Vec<usize> = parts
                    .map(|s| s.split('/').next().unwrap_or("").parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad())?;
                if idx.len() < 3 || idx.contains(&0) {
                    return Err(bad());
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0] - 1, idx[k] - 1, idx[k + 1] - 1]);
                }
            }
            _ => {}
        }
    }
    if faces.iter().flatten().any(|&i| i >= verts.len()) {
        return Err(SimError::Format("face index out of range".into()));
    }
    Ok((time, verts, faces))
}

/// Reads a trajectory from a JSON file or a directory of OBJ frames.
pub fn import_trajectory(path: &Path) -> Result<Trajectory, SimError> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(io_err(path))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("obj")))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(SimError::EmptyTrajectory);
        }
        let mut traj = Trajectory { times: Vec::new(), frames: Vec::new(), faces: Vec::new() };
        for (f, file) in files.iter().enumerate() {
            let text = fs::read_to_string(file).map_err(io_err(file))?;
            let (t, verts, faces) = parse_obj(&text)?;
            if f == 0 {
                traj.faces = faces;
            } else if faces != traj.faces || verts.len() != traj.frames[0].len() {
                return Err(SimError::Format(format!("{} has a different topology", file.display())));
            }
            traj.times.push(t.unwrap_or(f as f64));
            traj.frames.push(verts);
        }
        Ok(traj)
    } else {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let traj: Trajectory = serde_json::from_str(&text).map_err(|e| SimError::Format(e.to_string()))?;
        if traj.is_empty() {
            return Err(SimError::EmptyTrajectory);
        }
        if traj.times.len() != traj.frames.len() {
            return Err(SimError::Format("times and frames differ in length".into()));
        }
        Ok(traj)
    }
}
