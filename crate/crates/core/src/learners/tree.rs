//! CART trees shared by the decision tree, random forest, AdaBoost stumps
//! and gradient boosting.
//!
//! Nodes live in a flat vector; node 0 is the root. A sample goes left when
//! `x[feature] <= threshold`.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

/// Gains closer than this are treated as equal, so ties resolve to the
/// lowest feature index and then the smallest threshold.
pub const GAIN_TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Positive-class weight fraction for classification trees, additive
    /// score for boosting trees.
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf_value(&self, x: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => idx = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Number of split levels on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], idx: usize) -> usize {
            match &nodes[idx] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Weighted Gini impurity `1 - p0^2 - p1^2` of a node holding `total`
/// weight, `positive` of it in class 1.
pub fn gini(total: f64, positive: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let p1 = positive / total;
    let p0 = 1.0 - p1;
    1.0 - p0 * p0 - p1 * p1
}

/// Threshold halfway between two consecutive distinct values, nudged down
/// when rounding would land it on the upper value.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

/// Rows sorted by one feature, ties by row index.
fn sorted_by_feature(x: &Matrix, rows: &[usize], feature: usize) -> Vec<usize> {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|&a, &b| x.get(a, feature).total_cmp(&x.get(b, feature)).then(a.cmp(&b)));
    sorted
}

/// Exhaustive Gini split search over the given rows and features.
///
/// Candidates are midpoints between consecutive distinct values. Returns
/// `None` for a pure node or when every candidate feature is constant.
pub(crate) fn best_gini_split(
    x: &Matrix,
    y: &[u8],
    weights: &[f64],
    rows: &[usize],
    features: &[usize],
) -> Option<Split> {
    let total: f64 = rows.iter().map(|&r| weights[r]).sum();
    let positive: f64 = rows.iter().filter(|&&r| y[r] == 1).map(|&r| weights[r]).sum();
    if positive <= 0.0 || positive >= total {
        return None;
    }
    let parent = gini(total, positive);
    let mut best: Option<Split> = None;
    for &f in features {
        let sorted = sorted_by_feature(x, rows, f);
        let (mut left_w, mut left_pos) = (0.0, 0.0);
        for pair in sorted.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            left_w += weights[a];
            if y[a] == 1 {
                left_pos += weights[a];
            }
            let (va, vb) = (x.get(a, f), x.get(b, f));
            if va == vb {
                continue;
            }
            let right_w = total - left_w;
            let right_pos = positive - left_pos;
            let gain = parent
                - (left_w / total) * gini(left_w, left_pos)
                - (right_w / total) * gini(right_w, right_pos);
            if best.is_none_or(|s| gain > s.gain + GAIN_TIE_EPS) {
                best = Some(Split {
                    feature: f,
                    threshold: midpoint(va, vb),
                    gain,
                });
            }
        }
    }
    best
}

/// Best Gini split over all rows (weighted) and the given features.
pub fn best_split(x: &Matrix, y: &[u8], sample_weights: &[f64], feature_subset: &[usize]) -> Option<Split> {
    let rows: Vec<usize> = (0..x.rows()).collect();
    best_gini_split(x, y, sample_weights, &rows, feature_subset)
}

/// How many features a node (or tree) gets to look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    /// `ceil(sqrt(d))`
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => ((d as f64).sqrt().ceil() as usize).clamp(1, d.max(1)),
            MaxFeatures::Count(n) => n.clamp(1, d.max(1)),
        }
    }
}

/// Draws `k` of `d` feature indices without replacement, returned ascending.
pub(crate) fn sample_features<R: Rng>(rng: &mut R, d: usize, k: usize) -> Vec<usize> {
    if k >= d {
        return (0..d).collect();
    }
    let mut picked = sample(rng, d, k).into_vec();
    picked.sort_unstable();
    picked
}

pub(crate) struct GiniTreeBuilder<'a, R> {
    pub x: &'a Matrix,
    pub y: &'a [u8],
    pub weights: &'a [f64],
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub max_features: usize,
    pub rng: &'a mut R,
}

impl<R: Rng> GiniTreeBuilder<'_, R> {
    /// Grows a tree on the rows with positive weight.
    pub fn build(mut self) -> Tree {
        let rows: Vec<usize> = (0..self.x.rows()).filter(|&r| self.weights[r] > 0.0).collect();
        let mut nodes = Vec::new();
        self.grow(&mut nodes, rows, 0);
        Tree { nodes }
    }

    fn grow(&mut self, nodes: &mut Vec<TreeNode>, rows: Vec<usize>, depth: usize) -> usize {
        let idx = nodes.len();
        let total: f64 = rows.iter().map(|&r| self.weights[r]).sum();
        let positive: f64 = rows
            .iter()
            .filter(|&&r| self.y[r] == 1)
            .map(|&r| self.weights[r])
            .sum();
        let value = if total > 0.0 { positive / total } else { 0.0 };
        nodes.push(TreeNode::Leaf { value });
        if depth >= self.max_depth || rows.len() < self.min_samples_split {
            return idx;
        }
        let d = self.x.cols();
        let features = sample_features(self.rng, d, self.max_features);
        let Some(split) = best_gini_split(self.x, self.y, self.weights, &rows, &features) else {
            return idx;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.x.get(r, split.feature) <= split.threshold);
        let left = self.grow(nodes, left_rows, depth + 1);
        let right = self.grow(nodes, right_rows, depth + 1);
        nodes[idx] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        idx
    }
}
