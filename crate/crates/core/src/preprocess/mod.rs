//! Preprocessing: column drops, skew correction, composite features, label
//! encoding, stratified splitting and standardization.
//!
//! Each step is available on its own; [`fit_pipeline`] chains them in a fixed
//! order and records everything it learned in a [`FittedPipeline`] that can
//! be replayed on the raw table.

mod encode;
mod pipeline;
mod scale;
mod skew;
mod split;

use thiserror::Error;

use crate::tabular::{Table, TableError};

pub use encode::{encode_categoricals, replay_encoding, EncoderMaps, LabelEncoder};
pub use pipeline::{
    fit_pipeline, FittedPipeline, PipelineSpec, PreparedData, SplitSpec, StageShape,
    PIPELINE_FORMAT_VERSION,
};
pub use scale::{standardize, ScalerParam};
pub use skew::{
    apply_log1p, apply_log1p_where_skewed, engineer_composites, skewness, CompositeSpec,
};
pub use split::{stratified_split, SplitResult};

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("skewness undefined: {0}")]
    DegenerateColumn(&'static str),
    #[error("column `{column}` has negative value at row {row}")]
    NegativeValue { column: String, row: usize },
    #[error("column `{column}` has value `{value}` not seen during fitting")]
    UnseenCategory { column: String, value: String },
    #[error("class `{label}` has {count} member(s); at least 2 are needed to stratify")]
    ClassTooSmall { label: String, count: usize },
    #[error("column `{0}` has zero variance on the training rows")]
    ZeroVariance(String),
    #[error("{expected} labels expected, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid pipeline spec: {0}")]
    InvalidSpec(String),
    #[error("pipeline format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
}

pub type Result<T, E = PreprocessError> = std::result::Result<T, E>;

/// Removes the named columns. Every name must exist.
pub fn drop_columns(table: &Table, names: &[String]) -> Result<Table> {
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    Ok(table.without_columns(&names)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{ColumnData, ColumnKind, ColumnSchema};

    #[test]
    fn drop_known_and_unknown() {
        let t = Table::new(
            vec![
                ColumnSchema::feature("a", ColumnKind::Numeric),
                ColumnSchema::feature("b", ColumnKind::Numeric),
            ],
            vec![ColumnData::Numeric(vec![1.0]), ColumnData::Numeric(vec![2.0])],
        )
        .unwrap();
        assert_eq!(drop_columns(&t, &[]).unwrap(), t);
        let d = drop_columns(&t, &["a".to_string()]).unwrap();
        assert_eq!(d.names().collect::<Vec<_>>(), vec!["b"]);
        assert_eq!(d.n_rows(), 1);
        assert!(matches!(
            drop_columns(&t, &["zz".to_string()]),
            Err(PreprocessError::Table(TableError::UnknownColumn(_)))
        ));
    }
}
