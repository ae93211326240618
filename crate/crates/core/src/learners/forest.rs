use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{GiniTreeBuilder, MaxFeatures, Tree};
use crate::matrix::Matrix;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

impl ForestModel {
    /// Fraction of trees voting for class 1. A tree votes 1 when its leaf
    /// holds a strict positive majority.
    pub fn score(&self, x: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.leaf_value(x) > 0.5).count();
        votes as f64 / self.trees.len() as f64
    }
}

pub(crate) struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
}

/// Bootstrap multiplicities for `n` draws with replacement.
fn bootstrap_counts(rng: &mut seed::Rng, n: usize) -> Vec<f64> {
    let mut counts = vec![0.0; n];
    for _ in 0..n {
        counts[rng.random_range(0..n)] += 1.0;
    }
    counts
}

/// Trees are grown in parallel; each draws from its own RNG seeded by
/// `derive_seed(seed, "tree/{t}")`, so the result does not depend on
/// scheduling.
pub(crate) fn fit_forest(x: &Matrix, y: &[u8], params: &ForestParams, seed: u64) -> ForestModel {
    let max_features = params.max_features.resolve(x.cols());
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed::derive_seed(seed, &format!("tree/{t}")));
            let weights = if params.bootstrap {
                bootstrap_counts(&mut rng, x.rows())
            } else {
                vec![1.0; x.rows()]
            };
            GiniTreeBuilder {
                x,
                y,
                weights: &weights,
                max_depth: params.max_depth,
                min_samples_split: params.min_samples_split,
                max_features,
                rng: &mut rng,
            }
            .build()
        })
        .collect();
    ForestModel { trees }
}
