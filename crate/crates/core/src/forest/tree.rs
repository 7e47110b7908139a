//! Multi-output regression tree grown greedily under the absolute-error
//! criterion. Leaves predict the component-wise median of their rows.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ForestHyperparams;
use crate::error::ForestError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: Vec<f64>, samples: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    pub n_outputs: usize,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { value, .. } => return value,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = (&[f64], usize)> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { value, samples } => Some((value.as_slice(), *samples)),
            Node::Split { .. } => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Running sum of absolute deviations from the median under insertion.
#[derive(Default)]
struct MedianDeviation {
    low: BinaryHeap<Key>,
    high: BinaryHeap<Reverse<Key>>,
    low_sum: f64,
    high_sum: f64,
}

impl MedianDeviation {
    fn push(&mut self, v: f64) {
        match self.low.peek() {
            Some(top) if v > top.0 => {
                self.high.push(Reverse(Key(v)));
                self.high_sum += v;
            }
            _ => {
                self.low.push(Key(v));
                self.low_sum += v;
            }
        }
        if self.low.len() > self.high.len() + 1 {
            let Key(x) = self.low.pop().expect("non-empty");
            self.low_sum -= x;
            self.high.push(Reverse(Key(x)));
            self.high_sum += x;
        } else if self.high.len() > self.low.len() {
            let Reverse(Key(x)) = self.high.pop().expect("non-empty");
            self.high_sum -= x;
            self.low.push(Key(x));
            self.low_sum += x;
        }
    }

    fn deviation(&self) -> f64 {
        let Some(&Key(m)) = self.low.peek() else { return 0.0 };
        let d = m * self.low.len() as f64 - self.low_sum + self.high_sum - m * self.high.len() as f64;
        d.max(0.0)
    }
}

/// Median with the two middle values averaged for even counts.
pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn sum_abs_dev(values: &mut [f64]) -> f64 {
    let m = median(values);
    values.iter().map(|v| (v - m).abs()).sum()
}

struct Grower<'a, R: Rng> {
    x: &'a [Vec<f64>],
    y: &'a [Vec<f64>],
    scale: Vec<f64>,
    max_depth: usize,
    min_split: usize,
    min_leaf: usize,
    n_candidates: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    /// Number of sorted rows going left.
    position: usize,
    order: Vec<usize>,
    cost: f64,
}

impl<R: Rng> Grower<'_, R> {
    fn node_cost(&self, rows: &[usize]) -> f64 {
        (0..self.scale.len())
            .map(|c| {
                let mut v: Vec<f64> = rows.iter().map(|&r| self.y[r][c]).collect();
                sum_abs_dev(&mut v) / self.scale[c]
            })
            .sum()
    }

    fn leaf(&mut self, rows: &[usize]) -> usize {
        let value = (0..self.scale.len())
            .map(|c| {
                let mut v: Vec<f64> = rows.iter().map(|&r| self.y[r][c]).collect();
                median(&mut v)
            })
            .collect();
        self.nodes.push(Node::Leaf { value, samples: rows.len() });
        self.nodes.len() - 1
    }

    fn best_split(&mut self, rows: &[usize]) -> Option<BestSplit> {
        let d = self.x[0].len();
        let mut features: Vec<usize> = sample(self.rng, d, self.n_candidates).into_vec();
        features.sort_unstable();
        let n = rows.len();
        let outputs = self.scale.len();
        let mut best: Option<BestSplit> = None;
        let mut left_cost = vec![0.0; n + 1];
        let mut right_cost = vec![0.0; n + 1];
        for f in features {
            let first = self.x[rows[0]][f];
            if rows.iter().all(|&r| self.x[r][f] == first) {
                continue;
            }
            let mut order = rows.to_vec();
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            left_cost.iter_mut().for_each(|v| *v = 0.0);
            right_cost.iter_mut().for_each(|v| *v = 0.0);
            for c in 0..outputs {
                let mut acc = MedianDeviation::default();
                for (i, &r) in order.iter().enumerate() {
                    acc.push(self.y[r][c]);
                    left_cost[i + 1] += acc.deviation() / self.scale[c];
                }
                let mut acc = MedianDeviation::default();
                for (i, &r) in order.iter().enumerate().rev() {
                    acc.push(self.y[r][c]);
                    right_cost[i] += acc.deviation() / self.scale[c];
                }
            }
            for pos in self.min_leaf..=(n - self.min_leaf) {
                let (a, b) = (self.x[order[pos - 1]][f], self.x[order[pos]][f]);
                if a == b {
                    continue;
                }
                let cost = left_cost[pos] + right_cost[pos];
                if best.as_ref().is_none_or(|s| cost < s.cost) {
                    let mut threshold = 0.5 * (a + b);
                    if threshold >= b {
                        threshold = a;
                    }
                    best = Some(BestSplit { feature: f, threshold, position: pos, order: order.clone(), cost });
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: &[usize], depth: usize) -> usize {
        let n = rows.len();
        if depth >= self.max_depth || n < self.min_split || n < 2 * self.min_leaf {
            return self.leaf(rows);
        }
        let parent = self.node_cost(rows);
        if parent <= 0.0 {
            return self.leaf(rows);
        }
        let Some(split) = self.best_split(rows) else {
            return self.leaf(rows);
        };
        if split.cost >= parent - 1e-12 * parent.max(1.0) {
            return self.leaf(rows);
        }
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { value: Vec::new(), samples: 0 });
        let (l, r) = split.order.split_at(split.position);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        at
    }
}

pub(crate) fn check_training(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<(usize, usize), ForestError> {
    if x.is_empty() || y.is_empty() {
        return Err(ForestError::EmptyTraining);
    }
    if x.len() != y.len() {
        return Err(ForestError::RowMismatch { x: x.len(), y: y.len() });
    }
    let (d, m) = (x[0].len(), y[0].len());
    if d == 0 || m == 0 {
        return Err(ForestError::EmptyTraining);
    }
    for row in x {
        if row.len() != d {
            return Err(ForestError::DimensionMismatch { expected: d, got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(ForestError::NonFiniteInput);
        }
    }
    for row in y {
        if row.len() != m {
            return Err(ForestError::DimensionMismatch { expected: m, got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(ForestError::NonFiniteInput);
        }
    }
    Ok((d, m))
}

/// Per-output range over `rows`, or 1 where the output is constant.
pub(crate) fn output_scale(y: &[Vec<f64>], rows: &[usize]) -> Vec<f64> {
    (0..y[0].len())
        .map(|c| {
            let (lo, hi) = rows
                .iter()
                .map(|&r| y[r][c])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            if hi > lo {
                hi - lo
            } else {
                1.0
            }
        })
        .collect()
}

/// Grows one tree on the rows listed in `sample` (duplicates allowed, as in
/// a bootstrap resample).
pub fn fit_tree_on<R: Rng>(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    sample_rows: &[usize],
    hp: &ForestHyperparams,
    rng: &mut R,
) -> Result<RegressionTree, ForestError> {
    let (d, m) = check_training(x, y)?;
    hp.validate()?;
    if sample_rows.is_empty() {
        return Err(ForestError::EmptyTraining);
    }
    let n = sample_rows.len();
    let mut grower = Grower {
        x,
        y,
        scale: output_scale(y, sample_rows),
        max_depth: hp.max_depth,
        min_split: hp.min_samples_split.resolve(n).max(2),
        min_leaf: hp.min_samples_leaf.resolve(n).max(1),
        n_candidates: hp.feature_count(d),
        rng,
        nodes: Vec::new(),
    };
    grower.grow(sample_rows, 0);
    Ok(RegressionTree { nodes: grower.nodes, n_features: d, n_outputs: m })
}

pub fn fit_tree<R: Rng>(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    hp: &ForestHyperparams,
    rng: &mut R,
) -> Result<RegressionTree, ForestError> {
    let rows: Vec<usize> = (0..x.len()).collect();
    fit_tree_on(x, y, &rows, hp, rng)
}
