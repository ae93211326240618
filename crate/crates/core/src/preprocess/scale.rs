use serde::{Deserialize, Serialize};

use super::{PreprocessError, Result};
use crate::tabular::{ColumnData, Table};

/// Mean and population standard deviation of one training column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParam {
    pub column: String,
    pub mean: f64,
    pub std: f64,
}

impl ScalerParam {
    fn fit(column: &str, values: &[f64]) -> Result<Self> {
        let first = values.first().copied().unwrap_or(0.0);
        if values.iter().all(|&v| v == first) {
            return Err(PreprocessError::ZeroVariance(column.to_string()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Ok(Self {
            column: column.to_string(),
            mean,
            std: var.sqrt(),
        })
    }

    pub fn apply(&self, value: f64) -> f64 {
        (value - self.mean) / self.std
    }
}

pub(crate) fn apply_scaler(table: &Table, params: &[ScalerParam]) -> Result<Table> {
    let mut out = table.clone();
    for p in params {
        let scaled = table.numeric(&p.column)?.iter().map(|&v| p.apply(v)).collect();
        out = out.with_replaced(&p.column, ColumnData::Numeric(scaled))?;
    }
    Ok(out)
}

/// Fits per-column mean and standard deviation (divisor `n`) on `train` and
/// rescales both tables with those training parameters.
pub fn standardize(train: &Table, test: &Table) -> Result<(Table, Table, Vec<ScalerParam>)> {
    let params = train
        .names()
        .map(|name| ScalerParam::fit(name, train.numeric(name)?))
        .collect::<Result<Vec<_>>>()?;
    Ok((apply_scaler(train, &params)?, apply_scaler(test, &params)?, params))
}
