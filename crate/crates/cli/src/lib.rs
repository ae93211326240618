//! Orchestration of the attrition experiment: configuration, stage
//! artifacts in a run directory, the run manifest and the language-model
//! subcommands.

pub mod artifacts;
pub mod config;
pub mod experiment;
pub mod inspect;
pub mod llm;
pub mod manifest;

use std::fmt;

use thiserror::Error;

pub use config::{load_config, ConfigError, ExperimentConfig};
pub use experiment::{run_experiment, RunOptions};
pub use manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Load,
    Inspect,
    Preprocess,
    Resample,
    Train,
    Evaluate,
    Report,
    LlmPrepare,
    LlmFinetune,
    LlmPredict,
    LlmMock,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Inspect => "inspect",
            Stage::Preprocess => "preprocess",
            Stage::Resample => "resample",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
            Stage::LlmPrepare => "llm-prepare",
            Stage::LlmFinetune => "llm-finetune",
            Stage::LlmPredict => "llm-predict",
            Stage::LlmMock => "llm-mock",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An error tagged with the stage that raised it.
#[derive(Debug, Error)]
#[error("{stage}: {message}")]
pub struct StageError {
    pub stage: Stage,
    pub message: String,
}

pub type Result<T, E = StageError> = std::result::Result<T, E>;

pub trait StageContext<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T, E: fmt::Display> StageContext<T> for std::result::Result<T, E> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| StageError {
            stage,
            message: e.to_string(),
        })
    }
}

pub(crate) fn fail<T>(stage: Stage, message: impl Into<String>) -> Result<T> {
    Err(StageError {
        stage,
        message: message.into(),
    })
}
