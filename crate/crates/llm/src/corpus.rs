//! Prompt/completion corpus in JSON Lines form.

use attrition::tabular::{ColumnRole, Table};
use serde::{Deserialize, Serialize};

use crate::parse::Label;
use crate::LlmError;

pub const PROMPT_PREFIX: &str = "Analyze the employee information and predict employee turnover: ";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptRecord {
    pub prompt: String,
    pub completion: String,
}

/// `Name=Value` pairs for one row, joined by `"; "` in schema order. The
/// target column is left out. Numbers use the shortest round-trip form, so
/// integers carry no trailing `.0`.
pub fn serialize_employee(table: &Table, row: usize) -> String {
    table
        .schema()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.role != ColumnRole::Target)
        .map(|(col, s)| format!("{}={}", s.name, table.cell_text(row, col)))
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn prompt_for(table: &Table, row: usize) -> String {
    format!("{PROMPT_PREFIX}{}", serialize_employee(table, row))
}

/// One record per `(row, label)` pair, in input order.
pub fn build_records(table: &Table, rows: &[usize], labels: &[Label]) -> Result<Vec<PromptRecord>, LlmError> {
    if rows.len() != labels.len() {
        return Err(LlmError::LengthMismatch {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    Ok(rows
        .iter()
        .zip(labels)
        .map(|(&r, l)| PromptRecord {
            prompt: prompt_for(table, r),
            completion: l.as_str().to_string(),
        })
        .collect())
}

/// JSONL text: one `{"prompt":..,"completion":..}` object per line, each
/// line ending in `\n`.
pub fn to_jsonl(records: &[PromptRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn build_jsonl(table: &Table, rows: &[usize], labels: &[Label]) -> Result<String, LlmError> {
    Ok(to_jsonl(&build_records(table, rows, labels)?))
}

/// Strict parser: every line must be an object with exactly the `prompt`
/// and `completion` keys and a `Yes`/`No` completion.
pub fn parse_jsonl(text: &str) -> Result<Vec<PromptRecord>, LlmError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let rec: PromptRecord =
                serde_json::from_str(line).map_err(|e| LlmError::Corpus(format!("line {}: {e}", i + 1)))?;
            if Label::from_completion(&rec.completion).is_none() {
                return Err(LlmError::Corpus(format!(
                    "line {}: completion `{}` is neither Yes nor No",
                    i + 1,
                    rec.completion
                )));
            }
            Ok(rec)
        })
        .collect()
}
