//! Column-oriented typed tables.
//!
//! A [`Table`] is a list of named columns that are either numeric (`f64`) or
//! categorical (text). Tables are immutable once built; every transformation
//! in the crate returns a new table.

mod io;
mod stats;

use std::borrow::Cow;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{load_csv, read_csv, write_csv, write_csv_to, SchemaPolicy};
pub use stats::{
    ascii_histogram, class_distribution, histogram, summarize, ClassShare, HistogramBin,
    SummaryStats,
};

#[derive(Debug, Error)]
pub enum TableError {
    /// `row` is the zero-based data row (the header is not counted).
    #[error("missing or unparseable value at row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("file has no data rows")]
    EmptyFile,
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` is not numeric")]
    NonNumericColumn(String),
    #[error("column `{0}` is not categorical")]
    NonCategoricalColumn(String),
    #[error("column `{column}` has {actual} values, expected {expected}")]
    LengthMismatch {
        column: String,
        expected: usize,
        actual: usize,
    },
    #[error("header does not match the explicit schema: {0}")]
    SchemaMismatch(String),
    #[error("histogram needs at least one bin")]
    InvalidBins,
    #[error("schema must have exactly one target column, found {0}")]
    TargetCount(usize),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = TableError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    Feature,
    Target,
    DroppedId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub role: ColumnRole,
}

impl ColumnSchema {
    pub fn new(name: impl Into<String>, kind: ColumnKind, role: ColumnRole) -> Self {
        Self {
            name: name.into(),
            kind,
            role,
        }
    }

    pub fn feature(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self::new(name, kind, ColumnRole::Feature)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnData::Numeric(_) => ColumnKind::Numeric,
            ColumnData::Categorical(_) => ColumnKind::Categorical,
        }
    }

    fn select(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Categorical(v) => {
                ColumnData::Categorical(rows.iter().map(|&r| v[r].clone()).collect())
            }
        }
    }
}

/// Renders a numeric cell the way it is written to CSV: the shortest text
/// that parses back to the same `f64`, so `36.0` becomes `36`.
pub fn format_number(value: f64) -> String {
    format!("{value}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: Vec<ColumnSchema>,
    columns: Vec<ColumnData>,
    n_rows: usize,
}

impl Table {
    /// Builds a table, checking unique names, matching kinds and equal lengths.
    pub fn new(schema: Vec<ColumnSchema>, columns: Vec<ColumnData>) -> Result<Self> {
        if schema.len() != columns.len() {
            return Err(TableError::SchemaMismatch(format!(
                "{} schema entries for {} columns",
                schema.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for s in &schema {
            if !seen.insert(s.name.as_str()) {
                return Err(TableError::DuplicateColumn(s.name.clone()));
            }
        }
        let n_rows = columns.first().map_or(0, ColumnData::len);
        for (s, c) in schema.iter().zip(&columns) {
            if s.kind != c.kind() {
                return Err(TableError::SchemaMismatch(format!(
                    "column `{}` declared {:?} but holds {:?} data",
                    s.name,
                    s.kind,
                    c.kind()
                )));
            }
            if c.len() != n_rows {
                return Err(TableError::LengthMismatch {
                    column: s.name.clone(),
                    expected: n_rows,
                    actual: c.len(),
                });
            }
        }
        Ok(Self {
            schema,
            columns,
            n_rows,
        })
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn columns(&self) -> &[ColumnData] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.schema.iter().map(|s| s.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.schema
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| TableError::UnknownColumn(name.to_string()))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.schema.iter().any(|s| s.name == name)
    }

    pub fn column(&self, name: &str) -> Result<&ColumnData> {
        Ok(&self.columns[self.index_of(name)?])
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        match self.column(name)? {
            ColumnData::Numeric(v) => Ok(v),
            ColumnData::Categorical(_) => Err(TableError::NonNumericColumn(name.to_string())),
        }
    }

    pub fn categorical(&self, name: &str) -> Result<&[String]> {
        match self.column(name)? {
            ColumnData::Categorical(v) => Ok(v),
            ColumnData::Numeric(_) => Err(TableError::NonCategoricalColumn(name.to_string())),
        }
    }

    /// The single column whose role is `Target`.
    pub fn target(&self) -> Result<&ColumnSchema> {
        let mut targets = self.schema.iter().filter(|s| s.role == ColumnRole::Target);
        match (targets.next(), targets.next()) {
            (Some(t), None) => Ok(t),
            (None, _) => Err(TableError::TargetCount(0)),
            (Some(_), Some(_)) => Err(TableError::TargetCount(
                self.schema
                    .iter()
                    .filter(|s| s.role == ColumnRole::Target)
                    .count(),
            )),
        }
    }

    pub fn with_role(mut self, name: &str, role: ColumnRole) -> Result<Self> {
        let idx = self.index_of(name)?;
        self.schema[idx].role = role;
        Ok(self)
    }

    /// Text rendering of one cell.
    pub fn cell_text(&self, row: usize, col: usize) -> Cow<'_, str> {
        match &self.columns[col] {
            ColumnData::Numeric(v) => Cow::Owned(format_number(v[row])),
            ColumnData::Categorical(v) => Cow::Borrowed(v[row].as_str()),
        }
    }

    /// New table with the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Table {
        Table {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            n_rows: rows.len(),
        }
    }

    /// New table without the named columns.
    pub fn without_columns(&self, names: &[&str]) -> Result<Table> {
        for n in names {
            self.index_of(n)?;
        }
        let (schema, columns) = self
            .schema
            .iter()
            .zip(&self.columns)
            .filter(|(s, _)| !names.contains(&s.name.as_str()))
            .map(|(s, c)| (s.clone(), c.clone()))
            .unzip();
        Ok(Table {
            schema,
            columns,
            n_rows: self.n_rows,
        })
    }

    /// New table with column `name` replaced by `data`, keeping its position.
    pub fn with_replaced(&self, name: &str, data: ColumnData) -> Result<Table> {
        let idx = self.index_of(name)?;
        if data.len() != self.n_rows {
            return Err(TableError::LengthMismatch {
                column: name.to_string(),
                expected: self.n_rows,
                actual: data.len(),
            });
        }
        let mut out = self.clone();
        out.schema[idx].kind = data.kind();
        out.columns[idx] = data;
        Ok(out)
    }

    /// New table with an extra column appended at the end.
    pub fn with_appended(&self, schema: ColumnSchema, data: ColumnData) -> Result<Table> {
        let mut all_schema = self.schema.clone();
        let mut all_columns = self.columns.clone();
        all_schema.push(schema);
        all_columns.push(data);
        Table::new(all_schema, all_columns)
    }
}
