//! Dataset overview: descriptive statistics, class balance and histograms
//! of skewed columns.

use std::fmt::Write as _;

use attrition::preprocess::skewness;
use attrition::tabular::{ascii_histogram, class_distribution, histogram, summarize, ColumnData, ColumnKind, Table};

use crate::{fail, Result, Stage, StageContext};

pub const HISTOGRAM_BINS: usize = 10;
const BAR_WIDTH: usize = 40;

/// Empty or whitespace-only cells of categorical columns. Numeric columns
/// only load when every cell parses, so they cannot hold blanks.
pub fn missing_cells(table: &Table) -> usize {
    table
        .columns()
        .iter()
        .map(|c| match c {
            ColumnData::Categorical(v) => v.iter().filter(|s| s.trim().is_empty()).count(),
            ColumnData::Numeric(_) => 0,
        })
        .sum()
}

fn numeric_columns(table: &Table) -> Vec<&str> {
    table
        .schema()
        .iter()
        .filter(|s| s.kind == ColumnKind::Numeric)
        .map(|s| s.name.as_str())
        .collect()
}

/// Plain-text overview. With `column`, statistics and the histogram of that
/// column only; otherwise every numeric column and the histograms of those
/// whose skewness exceeds `skew_threshold`.
pub fn inspect(table: &Table, target: &str, column: Option<&str>, skew_threshold: f64) -> Result<String> {
    let stage = Stage::Inspect;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "rows: {}  columns: {}  missing cells: {}\n",
        table.n_rows(),
        table.n_cols(),
        missing_cells(table)
    );

    let columns: Vec<&str> = match column {
        Some(c) => {
            if table.column(c).stage(stage)?.kind() != ColumnKind::Numeric {
                return fail(stage, format!("column `{c}` is not numeric"));
            }
            vec![c]
        }
        None => numeric_columns(table),
    };
    let width = columns.iter().map(|c| c.len()).max().unwrap_or(7).max(7);
    let _ = writeln!(
        out,
        "{:<width$} {:>6} {:>10} {:>10} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "Feature", "Count", "Mean", "Std", "Min", "25%", "50%", "75%", "Max"
    );
    for c in &columns {
        let s = summarize(table, c).stage(stage)?;
        let _ = writeln!(
            out,
            "{:<width$} {:>6} {:>10.2} {:>10.2} {:>9} {:>9} {:>9} {:>9} {:>9}",
            c, s.count, s.mean, s.std, s.min, s.q25, s.q50, s.q75, s.max
        );
    }

    if column.is_none() && table.has_column(target) {
        let _ = writeln!(out, "\n{target} distribution");
        for share in class_distribution(table, target).stage(stage)? {
            let bar = "#".repeat((share.fraction * BAR_WIDTH as f64).round() as usize);
            let _ = writeln!(
                out,
                "  {:<6} {:>5}  {:>6.3}  {bar}",
                share.label, share.count, share.fraction
            );
        }
    }

    let plotted: Vec<&str> = match column {
        Some(c) => vec![c],
        None => columns
            .iter()
            .copied()
            .filter(|c| {
                table
                    .numeric(c)
                    .ok()
                    .and_then(|v| skewness(v).ok())
                    .is_some_and(|s| s > skew_threshold)
            })
            .collect(),
    };
    for c in plotted {
        let values = table.numeric(c).stage(stage)?;
        let skew = skewness(values).map_or_else(|_| "undefined".to_string(), |s| format!("{s:.3}"));
        let _ = writeln!(out, "\n{c} (skewness {skew})");
        let bins = histogram(table, c, HISTOGRAM_BINS).stage(stage)?;
        out.push_str(&ascii_histogram(&bins, BAR_WIDTH));
    }
    Ok(out)
}
