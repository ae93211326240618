//! Language-model track: corpus building, a client for a fine-tuning
//! service, completion parsing and an offline mock of the service.

pub mod client;
pub mod corpus;
pub mod mock;
pub mod parse;
pub mod predlog;

use std::time::Duration;

use thiserror::Error;

pub use client::{Backoff, Client, ClientConfig, FineTuneJob, JobStatus, LlmPrediction, API_KEY_ENV};
pub use corpus::{build_jsonl, build_records, parse_jsonl, prompt_for, serialize_employee, to_jsonl, PromptRecord, PROMPT_PREFIX};
pub use mock::{MockConfig, MockService};
pub use parse::{parse_completion, Label, Parsed};
pub use predlog::{read_prediction_log, write_prediction_log, PredictionRecord};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("service returned {status}: {body}")]
    Service { status: u16, body: String },
    #[error("rate limited; retry budget exhausted")]
    RateLimited,
    #[error("job still running after {0:?}")]
    Timeout(Duration),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("port already in use: {0}")]
    PortInUse(String),
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("invalid corpus: {0}")]
    Corpus(String),
    #[error("prediction log: {0}")]
    Log(String),
}
