//! Binary SAMME with weighted depth-1 Gini stumps.

use serde::{Deserialize, Serialize};

use super::tree::{GiniTreeBuilder, Tree};
use crate::matrix::Matrix;
use crate::seed;

/// Error floor used when a stump classifies every sample correctly.
pub const PERFECT_STUMP_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AdaRound {
    pub alpha: f64,
    pub weights: Vec<f64>,
    /// Boosting ends after this round.
    pub stop: bool,
}

/// One reweighting step. `err` is the weighted error of the stump under
/// `weights` (which sum to 1). `err >= 0.5` yields `alpha = 0` and stops;
/// `err = 0` caps alpha at the value for `err = 1e-10` and stops.
pub fn adaboost_round(weights: &[f64], misclassified: &[bool], err: f64, learning_rate: f64) -> AdaRound {
    if err >= 0.5 {
        return AdaRound {
            alpha: 0.0,
            weights: weights.to_vec(),
            stop: true,
        };
    }
    let perfect = err <= 0.0;
    let e = err.max(PERFECT_STUMP_EPS);
    let alpha = learning_rate * ((1.0 - e) / e).ln();
    let boost = alpha.exp();
    let mut next: Vec<f64> = weights
        .iter()
        .zip(misclassified)
        .map(|(&w, &m)| if m { w * boost } else { w })
        .collect();
    let total: f64 = next.iter().sum();
    for w in &mut next {
        *w /= total;
    }
    AdaRound {
        alpha,
        weights: next,
        stop: perfect,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub stumps: Vec<Tree>,
    pub alphas: Vec<f64>,
    /// Weighted positive fraction of the training labels, used when no stump
    /// carries weight.
    pub prior: f64,
}

impl AdaBoostModel {
    /// Alpha-weighted share of stumps voting for class 1.
    pub fn score(&self, x: &[f64]) -> f64 {
        let total: f64 = self.alphas.iter().sum();
        if total <= 0.0 {
            return self.prior;
        }
        let positive: f64 = self
            .stumps
            .iter()
            .zip(&self.alphas)
            .filter(|(s, _)| s.leaf_value(x) > 0.5)
            .map(|(_, a)| a)
            .sum();
        positive / total
    }
}

pub(crate) fn fit_adaboost(x: &Matrix, y: &[u8], n_estimators: usize, learning_rate: f64, seed: u64) -> AdaBoostModel {
    let n = x.rows();
    let mut weights = vec![1.0 / n as f64; n];
    let prior = y.iter().filter(|&&l| l == 1).count() as f64 / n as f64;
    let mut rng = seed::rng(seed::derive_seed(seed, "adaboost"));
    let mut stumps = Vec::new();
    let mut alphas = Vec::new();
    for _ in 0..n_estimators {
        let stump = GiniTreeBuilder {
            x,
            y,
            weights: &weights,
            max_depth: 1,
            min_samples_split: 2,
            max_features: x.cols(),
            rng: &mut rng,
        }
        .build();
        let misclassified: Vec<bool> = x
            .iter_rows()
            .zip(y)
            .map(|(r, &l)| u8::from(stump.leaf_value(r) > 0.5) != l)
            .collect();
        let err: f64 = weights
            .iter()
            .zip(&misclassified)
            .filter(|(_, &m)| m)
            .map(|(w, _)| w)
            .sum();
        let round = adaboost_round(&weights, &misclassified, err, learning_rate);
        if round.alpha > 0.0 {
            stumps.push(stump);
            alphas.push(round.alpha);
        }
        weights = round.weights;
        if round.stop {
            break;
        }
    }
    AdaBoostModel { stumps, alphas, prior }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_error_stops() {
        let r = adaboost_round(&[0.5, 0.5], &[true, false], 0.5, 1.0);
        assert_eq!(r.alpha, 0.0);
        assert!(r.stop);
    }

    #[test]
    fn alpha_one() {
        let e = std::f64::consts::E;
        let r = adaboost_round(&[0.5, 0.5], &[true, false], 1.0 / (1.0 + e), 1.0);
        assert!((r.alpha - 1.0).abs() < 1e-15);
        assert!(!r.stop);
    }

    #[test]
    fn perfect_stump_is_capped() {
        let r = adaboost_round(&[0.5, 0.5], &[false, false], 0.0, 0.01);
        assert!(r.stop);
        assert!((r.alpha - 0.01 * ((1.0 - 1e-10) / 1e-10f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn separable_data_scores() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]);
        let y = [0, 0, 1, 1];
        let m = fit_adaboost(&x, &y, 10, 0.5, 1);
        assert_eq!(m.stumps.len(), 1);
        assert_eq!(m.score(&[0.0]), 0.0);
        assert_eq!(m.score(&[3.0]), 1.0);
    }

    proptest! {
        #[test]
        fn weights_stay_a_distribution(
            raw in prop::collection::vec(0.01f64..1.0, 2..40),
            flags in prop::collection::vec(any::<bool>(), 40),
            lr in 0.001f64..1.0,
        ) {
            let total: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let mis = &flags[..w.len()];
            let err: f64 = w.iter().zip(mis).filter(|(_, &m)| m).map(|(v, _)| v).sum();
            let r = adaboost_round(&w, mis, err, lr);
            prop_assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(r.weights.iter().all(|&v| v >= 0.0));
        }
    }
}
