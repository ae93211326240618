use serde::{Deserialize, Serialize};

use super::{PreprocessError, Result};
use crate::tabular::{ColumnData, ColumnKind, ColumnRole, ColumnSchema, Table, TableError};

/// Adjusted Fisher-Pearson sample skewness, `g1 * sqrt(n(n-1)) / (n-2)` with
/// `g1 = m3 / m2^1.5` built from central moments.
pub fn skewness(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 3 {
        return Err(PreprocessError::DegenerateColumn("fewer than 3 values"));
    }
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return Err(PreprocessError::DegenerateColumn("zero variance"));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3) = (0.0, 0.0);
    for &v in values {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= nf;
    m3 /= nf;
    let g1 = m3 / m2.powf(1.5);
    Ok(g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0))
}

/// Replaces, with `ln(1 + x)`, every numeric feature column whose skewness
/// exceeds `threshold`. Constant columns are left alone. Returns the new
/// table and the transformed column names in table order.
pub fn apply_log1p_where_skewed(table: &Table, threshold: f64) -> Result<(Table, Vec<String>)> {
    let mut chosen = Vec::new();
    for (schema, data) in table.schema().iter().zip(table.columns()) {
        if schema.role != ColumnRole::Feature {
            continue;
        }
        if let ColumnData::Numeric(values) = data {
            match skewness(values) {
                Ok(s) if s > threshold => chosen.push(schema.name.clone()),
                Ok(_) | Err(PreprocessError::DegenerateColumn(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let out = apply_log1p(table, &chosen)?;
    Ok((out, chosen))
}

/// Applies `ln(1 + x)` to the named numeric columns.
pub fn apply_log1p(table: &Table, columns: &[String]) -> Result<Table> {
    let mut out = table.clone();
    for name in columns {
        let values = table.numeric(name)?;
        if let Some(row) = values.iter().position(|&v| v < 0.0) {
            return Err(PreprocessError::NegativeValue {
                column: name.clone(),
                row,
            });
        }
        let logged = values.iter().map(|v| v.ln_1p()).collect();
        out = out.with_replaced(name, ColumnData::Numeric(logged))?;
    }
    Ok(out)
}

/// A new feature defined as the row-wise mean of existing numeric columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositeSpec {
    pub name: String,
    pub sources: Vec<String>,
}

/// Appends each composite as the per-row mean of its sources, then removes
/// every source column.
pub fn engineer_composites(table: &Table, composites: &[CompositeSpec]) -> Result<Table> {
    let mut out = table.clone();
    let mut consumed: Vec<&str> = Vec::new();
    for c in composites {
        if c.sources.is_empty() {
            return Err(PreprocessError::InvalidSpec(format!(
                "composite `{}` has no sources",
                c.name
            )));
        }
        let sources = c
            .sources
            .iter()
            .map(|s| table.numeric(s))
            .collect::<Result<Vec<_>, TableError>>()?;
        let k = sources.len() as f64;
        let mean = (0..table.n_rows())
            .map(|row| sources.iter().map(|col| col[row]).sum::<f64>() / k)
            .collect();
        out = out.with_appended(
            ColumnSchema::feature(c.name.clone(), ColumnKind::Numeric),
            ColumnData::Numeric(mean),
        )?;
        consumed.extend(c.sources.iter().map(String::as_str));
    }
    consumed.sort_unstable();
    consumed.dedup();
    Ok(out.without_columns(&consumed)?)
}
