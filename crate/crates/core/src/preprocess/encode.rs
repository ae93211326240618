use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{PreprocessError, Result};
use crate::tabular::{ColumnData, Table};

/// Maps each distinct value to its rank among the sorted distinct values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelEncoder {
    classes: Vec<String>,
}

impl LabelEncoder {
    pub fn fit<S: AsRef<str>>(values: &[S]) -> Self {
        let classes: BTreeSet<&str> = values.iter().map(AsRef::as_ref).collect();
        Self {
            classes: classes.into_iter().map(str::to_string).collect(),
        }
    }

    /// Sorted distinct values; the position of a value is its code.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn encode(&self, value: &str) -> Option<usize> {
        self.classes
            .binary_search_by(|c| c.as_str().cmp(value))
            .ok()
    }

    pub fn decode(&self, code: usize) -> Option<&str> {
        self.classes.get(code).map(String::as_str)
    }

    fn encode_column(&self, column: &str, values: &[String]) -> Result<Vec<f64>> {
        values
            .iter()
            .map(|v| {
                self.encode(v)
                    .map(|c| c as f64)
                    .ok_or_else(|| PreprocessError::UnseenCategory {
                        column: column.to_string(),
                        value: v.clone(),
                    })
            })
            .collect()
    }
}

pub type EncoderMaps = BTreeMap<String, LabelEncoder>;

/// Fits one [`LabelEncoder`] per categorical column and replaces the column
/// by its codes.
pub fn encode_categoricals(table: &Table) -> Result<(Table, EncoderMaps)> {
    let mut maps = EncoderMaps::new();
    for (schema, data) in table.schema().iter().zip(table.columns()) {
        if let ColumnData::Categorical(values) = data {
            maps.insert(schema.name.clone(), LabelEncoder::fit(values));
        }
    }
    let out = replay_encoding(table, &maps)?;
    Ok((out, maps))
}

/// Encodes categorical columns with previously fitted maps. A value missing
/// from its column's map is an error.
pub fn replay_encoding(table: &Table, maps: &EncoderMaps) -> Result<Table> {
    let mut out = table.clone();
    for (name, encoder) in maps {
        let values = table.categorical(name)?;
        let codes = encoder.encode_column(name, values)?;
        out = out.with_replaced(name, ColumnData::Numeric(codes))?;
    }
    Ok(out)
}
