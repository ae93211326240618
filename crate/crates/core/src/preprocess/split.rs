use std::collections::BTreeMap;
use std::fmt::Debug;

use rand::seq::SliceRandom;

use super::{PreprocessError, Result};
use crate::seed;
use crate::tabular::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult<L> {
    pub x_train: Table,
    pub x_test: Table,
    pub y_train: Vec<L>,
    pub y_test: Vec<L>,
    /// Original row indices, ascending.
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub seed: u64,
}

/// Per-class test counts: floor of each class's exact share, topped up by
/// largest remainder (ties to the smaller label) until the total equals
/// `round(n * test_fraction)`.
pub(crate) fn allocate_test_counts(class_sizes: &[usize], test_fraction: f64) -> Vec<usize> {
    let n: usize = class_sizes.iter().sum();
    let target = (n as f64 * test_fraction).round() as usize;
    let mut counts: Vec<usize> = Vec::with_capacity(class_sizes.len());
    let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(class_sizes.len());
    for (i, &size) in class_sizes.iter().enumerate() {
        let exact = size as f64 * test_fraction;
        let floor = exact.floor() as usize;
        counts.push(floor);
        remainders.push((exact - floor as f64, i));
    }
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let missing = target.saturating_sub(counts.iter().sum());
    for &(_, i) in remainders.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

/// Splits rows into train and test parts with class proportions preserved.
/// Rows of each class are shuffled with a generator seeded by `seed`, and
/// the first rows of every shuffled class go to the test part.
pub fn stratified_split<L>(
    x: &Table,
    y: &[L],
    test_fraction: f64,
    seed: u64,
) -> Result<SplitResult<L>>
where
    L: Ord + Copy + Debug,
{
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(PreprocessError::InvalidSpec(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    if y.len() != x.n_rows() {
        return Err(PreprocessError::LengthMismatch {
            expected: x.n_rows(),
            actual: y.len(),
        });
    }
    let mut by_class: BTreeMap<L, Vec<usize>> = BTreeMap::new();
    for (i, &label) in y.iter().enumerate() {
        by_class.entry(label).or_default().push(i);
    }
    for (label, rows) in &by_class {
        if rows.len() < 2 {
            return Err(PreprocessError::ClassTooSmall {
                label: format!("{label:?}"),
                count: rows.len(),
            });
        }
    }
    let sizes: Vec<usize> = by_class.values().map(Vec::len).collect();
    let test_counts = allocate_test_counts(&sizes, test_fraction);

    let mut rng = seed::rng(seed);
    let mut train_rows = Vec::with_capacity(y.len());
    let mut test_rows = Vec::new();
    for (mut rows, n_test) in by_class.into_values().zip(test_counts) {
        rows.shuffle(&mut rng);
        test_rows.extend_from_slice(&rows[..n_test]);
        train_rows.extend_from_slice(&rows[n_test..]);
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();

    Ok(SplitResult {
        x_train: x.select_rows(&train_rows),
        x_test: x.select_rows(&test_rows),
        y_train: train_rows.iter().map(|&r| y[r]).collect(),
        y_test: test_rows.iter().map(|&r| y[r]).collect(),
        train_rows,
        test_rows,
        seed,
    })
}
