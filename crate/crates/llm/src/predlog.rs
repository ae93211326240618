//! CSV log of model answers: `row_index,raw_completion,parsed,true_label`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::parse::{parse_completion, Label, Parsed};
use crate::LlmError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub row_index: usize,
    pub raw_completion: String,
    pub parsed: Parsed,
    pub true_label: Label,
}

impl PredictionRecord {
    /// Predicted class with `Yes` as 1. Unparseable answers count as `No`.
    pub fn predicted_class(&self) -> u8 {
        self.parsed.label().map_or(0, Label::class)
    }
}

pub fn write_prediction_log<W: Write>(records: &[PredictionRecord], writer: W) -> Result<(), LlmError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    for r in records {
        w.serialize(r).map_err(|e| LlmError::Log(e.to_string()))?;
    }
    w.flush().map_err(|e| LlmError::Log(e.to_string()))
}

/// Reads a log back, rejecting rows whose `parsed` column disagrees with
/// the raw completion.
pub fn read_prediction_log<R: Read>(reader: R) -> Result<Vec<PredictionRecord>, LlmError> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for rec in r.deserialize::<PredictionRecord>() {
        let rec = rec.map_err(|e| LlmError::Log(e.to_string()))?;
        if parse_completion(&rec.raw_completion) != rec.parsed {
            return Err(LlmError::Log(format!(
                "row {}: parsed `{}` does not follow from `{}`",
                rec.row_index, rec.parsed, rec.raw_completion
            )));
        }
        out.push(rec);
    }
    Ok(out)
}
