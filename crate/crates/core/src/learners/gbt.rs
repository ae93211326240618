//! Second-order gradient boosting for the binary logistic objective.
//!
//! Each round fits a regression tree to the gradients `g = p - y` and
//! hessians `h = p(1 - p)`. Splits maximize
//! `0.5 * (GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l))` and leaves hold
//! `-G/(H+l)`.

use serde::{Deserialize, Serialize};

use super::logistic::{log1p_exp, sigmoid};
use super::tree::{sample_features, Tree, TreeNode, GAIN_TIE_EPS};
use crate::matrix::Matrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbtTreeParams {
    pub max_depth: usize,
    pub lambda: f64,
    pub min_child_weight: f64,
    /// Columns sampled per tree.
    pub n_columns: usize,
}

fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

fn score_term(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

struct Grower<'a> {
    x: &'a Matrix,
    grad: &'a [f64],
    hess: &'a [f64],
    params: GbtTreeParams,
    columns: Vec<usize>,
}

impl Grower<'_> {
    fn best(&self, rows: &[usize]) -> Option<(usize, f64)> {
        let g: f64 = rows.iter().map(|&r| self.grad[r]).sum();
        let h: f64 = rows.iter().map(|&r| self.hess[r]).sum();
        let lambda = self.params.lambda;
        let parent = score_term(g, h, lambda);
        let mut best: Option<(usize, f64, f64)> = None;
        for &f in &self.columns {
            let mut sorted = rows.to_vec();
            sorted.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)).then(a.cmp(&b)));
            let (mut gl, mut hl) = (0.0, 0.0);
            for pair in sorted.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                gl += self.grad[a];
                hl += self.hess[a];
                let (va, vb) = (self.x.get(a, f), self.x.get(b, f));
                if va == vb {
                    continue;
                }
                let (gr, hr) = (g - gl, h - hl);
                if hl < self.params.min_child_weight || hr < self.params.min_child_weight {
                    continue;
                }
                let gain = 0.5 * (score_term(gl, hl, lambda) + score_term(gr, hr, lambda) - parent);
                if gain > 0.0 && best.is_none_or(|(_, _, bg)| gain > bg + GAIN_TIE_EPS) {
                    let mid = va + (vb - va) / 2.0;
                    best = Some((f, if mid < vb { mid } else { va }, gain));
                }
            }
        }
        best.map(|(f, t, _)| (f, t))
    }

    fn grow(&self, nodes: &mut Vec<TreeNode>, rows: Vec<usize>, depth: usize) -> usize {
        let idx = nodes.len();
        let g: f64 = rows.iter().map(|&r| self.grad[r]).sum();
        let h: f64 = rows.iter().map(|&r| self.hess[r]).sum();
        nodes.push(TreeNode::Leaf {
            value: leaf_weight(g, h, self.params.lambda),
        });
        if depth >= self.params.max_depth || rows.len() < 2 {
            return idx;
        }
        let Some((feature, threshold)) = self.best(&rows) else {
            return idx;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.x.get(i, feature) <= threshold);
        let left = self.grow(nodes, l, depth + 1);
        let right = self.grow(nodes, r, depth + 1);
        nodes[idx] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        idx
    }
}

/// Grows one boosting tree. Leaf values are raw weights; the caller applies
/// the learning rate.
pub fn gbt_round(grad: &[f64], hess: &[f64], x: &Matrix, params: &GbtTreeParams, rng: &mut seed::Rng) -> Tree {
    let columns = sample_features(rng, x.cols(), params.n_columns);
    let grower = Grower {
        x,
        grad,
        hess,
        params: *params,
        columns,
    };
    let mut nodes = Vec::new();
    grower.grow(&mut nodes, (0..x.rows()).collect(), 0);
    Tree { nodes }
}

/// Mean binary log-loss for margins `f`.
pub fn log_loss(margins: &[f64], y: &[u8]) -> f64 {
    let total: f64 = margins
        .iter()
        .zip(y)
        .map(|(&f, &l)| if l == 1 { log1p_exp(-f) } else { log1p_exp(f) })
        .sum();
    total / y.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base_margin: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
    /// Training log-loss before any tree, then after each round.
    pub loss_history: Vec<f64>,
}

impl GbtModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.base_margin + self.learning_rate * self.trees.iter().map(|t| t.leaf_value(x)).sum::<f64>()
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

pub(crate) fn fit_gbt(
    x: &Matrix,
    y: &[u8],
    n_estimators: usize,
    learning_rate: f64,
    params: &GbtTreeParams,
    seed: u64,
) -> GbtModel {
    let n = y.len();
    let p = y.iter().filter(|&&l| l == 1).count() as f64 / n as f64;
    let base_margin = (p / (1.0 - p)).ln();
    let mut rng = seed::rng(seed::derive_seed(seed, "gbt"));
    let mut margins = vec![base_margin; n];
    let mut loss_history = vec![log_loss(&margins, y)];
    let mut trees = Vec::with_capacity(n_estimators);
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    for _ in 0..n_estimators {
        for i in 0..n {
            let pi = sigmoid(margins[i]);
            grad[i] = pi - f64::from(y[i]);
            hess[i] = pi * (1.0 - pi);
        }
        let tree = gbt_round(&grad, &hess, x, params, &mut rng);
        for (m, row) in margins.iter_mut().zip(x.iter_rows()) {
            *m += learning_rate * tree.leaf_value(row);
        }
        loss_history.push(log_loss(&margins, y));
        trees.push(tree);
    }
    if loss_history.windows(2).any(|w| w[1] > w[0]) {
        log::warn!("boosting training loss increased in at least one round");
    }
    GbtModel {
        base_margin,
        learning_rate,
        trees,
        loss_history,
    }
}
