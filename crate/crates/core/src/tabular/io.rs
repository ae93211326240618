use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{ColumnData, ColumnKind, ColumnRole, ColumnSchema, Result, Table, TableError};

/// How column kinds are decided when reading CSV.
#[derive(Debug, Clone, Default)]
pub enum SchemaPolicy {
    /// A column is numeric iff every cell parses as a finite number.
    #[default]
    Infer,
    /// Header must list exactly these columns, in this order.
    Explicit(Vec<ColumnSchema>),
}

pub fn load_csv(path: impl AsRef<Path>, policy: &SchemaPolicy) -> Result<Table> {
    let file = File::open(path)?;
    read_csv(file, policy)
}

pub fn read_csv<R: Read>(reader: R, policy: &SchemaPolicy) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);

    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(TableError::EmptyFile);
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for record in rdr.records() {
        let record = record?;
        for (col, field) in cells.iter_mut().zip(record.iter()) {
            col.push(field.to_string());
        }
    }
    let n_rows = cells[0].len();
    if n_rows == 0 {
        return Err(TableError::EmptyFile);
    }

    let schema = match policy {
        SchemaPolicy::Infer => {
            let mut schema = Vec::with_capacity(header.len());
            for (name, col) in header.iter().zip(&cells) {
                let kind = if col.iter().all(|c| parse_number(c).is_some()) {
                    ColumnKind::Numeric
                } else {
                    ColumnKind::Categorical
                };
                schema.push(ColumnSchema::new(name.clone(), kind, ColumnRole::Feature));
            }
            schema
        }
        SchemaPolicy::Explicit(schema) => {
            let expected: Vec<&str> = schema.iter().map(|s| s.name.as_str()).collect();
            if expected != header.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(TableError::SchemaMismatch(format!(
                    "expected columns {expected:?}, found {header:?}"
                )));
            }
            schema.clone()
        }
    };

    let mut columns = Vec::with_capacity(schema.len());
    for (s, col) in schema.iter().zip(cells) {
        let data = match s.kind {
            ColumnKind::Numeric => {
                let mut values = Vec::with_capacity(n_rows);
                for (row, cell) in col.iter().enumerate() {
                    values.push(parse_number(cell).ok_or_else(|| TableError::MissingValue {
                        row,
                        column: s.name.clone(),
                    })?);
                }
                ColumnData::Numeric(values)
            }
            ColumnKind::Categorical => {
                if let Some(row) = col.iter().position(|c| c.trim().is_empty()) {
                    return Err(TableError::MissingValue {
                        row,
                        column: s.name.clone(),
                    });
                }
                ColumnData::Categorical(col)
            }
        };
        columns.push(data);
    }
    Table::new(schema, columns)
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn write_csv(table: &Table, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_csv_to(table, file)
}

pub fn write_csv_to<W: Write>(table: &Table, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    wtr.write_record(table.names())?;
    let mut record = Vec::with_capacity(table.n_cols());
    for row in 0..table.n_rows() {
        record.clear();
        for col in 0..table.n_cols() {
            record.push(table.cell_text(row, col).into_owned());
        }
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}
