use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Result, Table, TableError};

/// Count, mean, sample standard deviation and quartiles of a numeric column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub max: f64,
}

/// Describes a numeric column. `std` divides by `n - 1`; quartiles interpolate
/// linearly between the closest ranks (position `(n - 1) * q`).
pub fn summarize(table: &Table, column: &str) -> Result<SummaryStats> {
    let values = table.numeric(column)?;
    Ok(summarize_values(values))
}

pub(crate) fn summarize_values(values: &[f64]) -> SummaryStats {
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    SummaryStats {
        count: n,
        mean,
        std,
        min: sorted[0],
        q25: quantile_sorted(&sorted, 0.25),
        q50: quantile_sorted(&sorted, 0.5),
        q75: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
    }
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassShare {
    pub label: String,
    pub count: usize,
    pub fraction: f64,
}

/// Label frequencies of a categorical column, most frequent first
/// (equal counts ordered by label).
pub fn class_distribution(table: &Table, target: &str) -> Result<Vec<ClassShare>> {
    let labels = table.categorical(target)?;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l.as_str()).or_default() += 1;
    }
    let n = labels.len() as f64;
    let mut shares: Vec<ClassShare> = counts
        .into_iter()
        .map(|(label, count)| ClassShare {
            label: label.to_string(),
            count,
            fraction: count as f64 / n,
        })
        .collect();
    shares.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.label.cmp(&b.label)));
    Ok(shares)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Equal-width bins over `[min, max]`. Every bin is half-open `[lo, hi)` except
/// the last, which also takes `max`. A constant column yields a single
/// zero-width bin holding every row.
pub fn histogram(table: &Table, column: &str, bins: usize) -> Result<Vec<HistogramBin>> {
    let values = table.numeric(column)?;
    if bins == 0 {
        return Err(TableError::InvalidBins);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok(vec![HistogramBin {
            lo: min,
            hi: max,
            count: values.len(),
        }]);
    }
    let width = (max - min) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = (((v - min) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lo: min + width * i as f64,
            hi: if i + 1 == bins {
                max
            } else {
                min + width * (i + 1) as f64
            },
            count,
        })
        .collect())
}

/// Renders bins as aligned text bars, the longest bar `width` characters wide.
pub fn ascii_histogram(bins: &[HistogramBin], width: usize) -> String {
    let peak = bins.iter().map(|b| b.count).max().unwrap_or(0).max(1);
    let labels: Vec<String> = bins
        .iter()
        .map(|b| format!("[{:.2}, {:.2}]", b.lo, b.hi))
        .collect();
    let label_width = labels.iter().map(String::len).max().unwrap_or(0);
    let count_width = bins
        .iter()
        .map(|b| b.count.to_string().len())
        .max()
        .unwrap_or(1);
    let mut out = String::new();
    for (b, label) in bins.iter().zip(labels) {
        let bar = (b.count * width).div_ceil(peak);
        let _ = writeln!(
            out,
            "{label:>label_width$} {:>count_width$} {}",
            b.count,
            "#".repeat(bar)
        );
    }
    out
}
