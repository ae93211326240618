//! Confusion counts, precision / recall / F1 and support-weighted averages.
//!
//! Class 1 is the positive class. A ratio whose denominator is zero is
//! reported as 0, and so is F1 when precision and recall are both 0.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{truth} true labels but {pred} predictions")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("label {0} is not binary")]
    NonBinaryLabel(u8),
    #[error("no classes with positive support")]
    EmptyReport,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same counts with class 0 treated as positive.
    pub fn flipped(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix, MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            truth: y_true.len(),
            pred: y_pred.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            (0, 0) => cm.tn += 1,
            (bad, _) if bad > 1 => return Err(MetricsError::NonBinaryLabel(bad)),
            (_, bad) => return Err(MetricsError::NonBinaryLabel(bad)),
        }
    }
    Ok(cm)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Precision, recall and F1 of the positive class.
pub fn precision_recall_f1(cm: &ConfusionMatrix) -> (f64, f64, f64) {
    let p = ratio(cm.tp, cm.tp + cm.fp);
    let r = ratio(cm.tp, cm.tp + cm.fn_);
    (p, r, f1_score(p, r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub label: u8,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedReport {
    pub classes: Vec<ClassReport>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Per-class reports for labels 0 and 1.
pub fn class_reports(cm: &ConfusionMatrix) -> Vec<ClassReport> {
    [(0u8, cm.flipped()), (1u8, *cm)]
        .into_iter()
        .map(|(label, c)| {
            let (precision, recall, f1) = precision_recall_f1(&c);
            ClassReport {
                label,
                precision,
                recall,
                f1,
                support: c.tp + c.fn_,
            }
        })
        .collect()
}

/// Support-weighted means over the classes.
pub fn weighted_average(reports: &[ClassReport]) -> Result<WeightedReport, MetricsError> {
    let support: usize = reports.iter().map(|r| r.support).sum();
    if support == 0 {
        return Err(MetricsError::EmptyReport);
    }
    let mean = |f: fn(&ClassReport) -> f64| {
        reports.iter().map(|r| r.support as f64 * f(r)).sum::<f64>() / support as f64
    };
    Ok(WeightedReport {
        classes: reports.to_vec(),
        precision: mean(|r| r.precision),
        recall: mean(|r| r.recall),
        f1: mean(|r| r.f1),
        support,
    })
}

/// Confusion, per-class reports and weighted average in one step.
pub fn evaluate(y_true: &[u8], y_pred: &[u8]) -> Result<WeightedReport, MetricsError> {
    let cm = confusion(y_true, y_pred)?;
    weighted_average(&class_reports(&cm))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedReport {
    pub text: String,
    pub csv: String,
}

pub const REPORT_CSV_HEADER: &str = "model,precision,recall,f1,support";

/// Aligned text table rounded to two decimals, plus a CSV with full
/// precision.
pub fn render_report(rows: &[(String, WeightedReport)]) -> RenderedReport {
    let width = rows
        .iter()
        .map(|(name, _)| name.len())
        .chain(std::iter::once("Model".len()))
        .max()
        .unwrap_or(5);
    let mut text = String::new();
    let _ = writeln!(text, "{:<width$}  {:>9}  {:>6}  {:>8}", "Model", "Precision", "Recall", "F1-score");
    for (name, r) in rows {
        let _ = writeln!(
            text,
            "{:<width$}  {:>9.2}  {:>6.2}  {:>8.2}",
            name, r.precision, r.recall, r.f1
        );
    }
    let mut csv = String::from(REPORT_CSV_HEADER);
    csv.push('\n');
    for (name, r) in rows {
        let _ = writeln!(csv, "{},{},{},{},{}", csv_field(name), r.precision, r.recall, r.f1, r.support);
    }
    RenderedReport { text, csv }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
