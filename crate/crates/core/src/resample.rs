//! SMOTE oversampling for binary training sets.
//!
//! Synthetic minority rows are placed on the segment between a minority row
//! and one of its `k` nearest minority neighbours. Base rows are visited
//! round-robin in index order, so when the number of new rows is not a
//! multiple of the minority count the earliest rows get one extra.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learners::knn::brute_force_neighbors;
use crate::matrix::Matrix;
use crate::seed;

#[derive(Debug, Error, PartialEq)]
pub enum ResampleError {
    #[error("only one class present")]
    SingleClass,
    #[error("SMOTE needs exactly two classes, found {0}")]
    NotBinary(usize),
    #[error("minority class has {minority} rows; more than k = {k} are required")]
    TooFewMinoritySamples { minority: usize, k: usize },
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("invalid SMOTE config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    /// Desired minority count as a fraction of the majority count.
    pub target_ratio: f64,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 5,
            target_ratio: 1.0,
            seed: 0,
        }
    }
}

impl SmoteConfig {
    pub fn validate(&self) -> Result<(), ResampleError> {
        if self.k_neighbors == 0 {
            return Err(ResampleError::InvalidConfig("k_neighbors must be >= 1".into()));
        }
        if !(self.target_ratio > 0.0 && self.target_ratio <= 1.0) {
            return Err(ResampleError::InvalidConfig(format!(
                "target_ratio must lie in (0, 1], got {}",
                self.target_ratio
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub x: Matrix,
    pub y: Vec<u8>,
    pub minority_label: Option<u8>,
    pub n_synthetic: usize,
}

/// Oversamples the minority class until it holds
/// `round(target_ratio * majority)` rows. Input rows come first, unchanged
/// and in order; synthetic rows are appended.
pub fn smote_oversample(x: &Matrix, y: &[u8], config: &SmoteConfig) -> Result<Resampled, ResampleError> {
    config.validate()?;
    if x.rows() != y.len() {
        return Err(ResampleError::LengthMismatch {
            rows: x.rows(),
            labels: y.len(),
        });
    }
    let mut classes: Vec<u8> = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    match classes.len() {
        0 | 1 => return Err(ResampleError::SingleClass),
        2 => {}
        n => return Err(ResampleError::NotBinary(n)),
    }
    let count = |c: u8| y.iter().filter(|&&l| l == c).count();
    let (a, b) = (count(classes[0]), count(classes[1]));
    // equal counts: the lower label is treated as minority, and nothing is needed
    let (minority_label, minority, majority) = if b < a {
        (classes[1], b, a)
    } else {
        (classes[0], a, b)
    };
    let desired = (config.target_ratio * majority as f64).round() as usize;
    let needed = desired.saturating_sub(minority);
    if needed == 0 {
        return Ok(Resampled {
            x: x.clone(),
            y: y.to_vec(),
            minority_label: None,
            n_synthetic: 0,
        });
    }
    let k = config.k_neighbors;
    if minority <= k {
        return Err(ResampleError::TooFewMinoritySamples { minority, k });
    }

    let minority_rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == minority_label).collect();
    let store = x.select_rows(&minority_rows);
    let neighbors: Vec<Vec<usize>> = (0..store.rows())
        .map(|i| {
            brute_force_neighbors(&store, store.row(i), k, Some(i))
                .into_iter()
                .map(|n| n.index)
                .collect()
        })
        .collect();

    let mut rng = seed::rng(config.seed);
    let mut out_x = x.clone();
    let mut out_y = y.to_vec();
    let mut synthetic = vec![0.0; x.cols()];
    for j in 0..needed {
        let base = j % store.rows();
        let nn = neighbors[base][rng.random_range(0..k)];
        let gap: f64 = rng.random();
        let (p, q) = (store.row(base), store.row(nn));
        for (s, (&pi, &qi)) in synthetic.iter_mut().zip(p.iter().zip(q)) {
            *s = pi + gap * (qi - pi);
        }
        out_x.push_row(&synthetic);
        out_y.push(minority_label);
    }
    Ok(Resampled {
        x: out_x,
        y: out_y,
        minority_label: Some(minority_label),
        n_synthetic: needed,
    })
}
