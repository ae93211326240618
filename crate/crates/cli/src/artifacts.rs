//! Files exchanged between stages inside a run directory.

use std::path::{Path, PathBuf};

use attrition::metrics::WeightedReport;
use attrition::Matrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{fail, Result, Stage, StageContext};

pub const CONFIG_FILE: &str = "experiment.json";
pub const PIPELINE_FILE: &str = "pipeline.json";
pub const PREPARED_FILE: &str = "prepared.json";
pub const MODELS_DIR: &str = "models";
pub const METRICS_FILE: &str = "metrics.json";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const REPORT_CSV_FILE: &str = "report.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const JOB_FILE: &str = "finetune_job.json";
pub const PREDICTIONS_FILE: &str = "predictions.csv";

/// Model-ready data: the scaled split plus the SMOTE-balanced training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedArtifact {
    pub feature_names: Vec<String>,
    /// Row indices into the raw dataset.
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub x_train: Matrix,
    pub y_train: Vec<u8>,
    pub x_test: Matrix,
    pub y_test: Vec<u8>,
    /// `x_train` followed by the synthetic rows.
    pub balanced_x: Matrix,
    pub balanced_y: Vec<u8>,
    pub n_synthetic: usize,
}

/// One evaluated model, as stored in `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub key: String,
    pub name: String,
    pub report: WeightedReport,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    /// Creates the directory (and parents) if needed.
    pub fn create(root: impl Into<PathBuf>, stage: Stage) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root)
            .map_err(|e| format!("cannot create {}: {e}", root.display()))
            .stage(stage)?;
        Ok(Self { root })
    }

    /// An existing run directory.
    pub fn open(root: impl Into<PathBuf>, stage: Stage) -> Result<Self> {
        let root = root.into();
        if !root.is_dir() {
            return fail(stage, format!("run directory {} does not exist", root.display()));
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn exists(&self, name: &str) -> bool {
        self.path(name).is_file()
    }

    pub fn model_path(&self, key: &str) -> PathBuf {
        self.root.join(MODELS_DIR).join(format!("{key}.json"))
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8], stage: Stage) -> Result<()> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .map_err(|e| format!("cannot create {}: {e}", parent.display()))
                .stage(stage)?;
        }
        std::fs::write(&path, bytes)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))
            .stage(stage)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T, stage: Stage) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).stage(stage)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes(), stage)
    }

    /// Reads a file written by an earlier stage; `producer` names the
    /// subcommand that writes it.
    pub fn read_bytes(&self, name: &str, producer: &str, stage: Stage) -> Result<Vec<u8>> {
        let path = self.path(name);
        if !path.is_file() {
            return fail(
                stage,
                format!("{} not found; run `{producer}` first", path.display()),
            );
        }
        std::fs::read(&path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))
            .stage(stage)
    }

    pub fn read_json<T: DeserializeOwned>(&self, name: &str, producer: &str, stage: Stage) -> Result<T> {
        let bytes = self.read_bytes(name, producer, stage)?;
        serde_json::from_slice(&bytes)
            .map_err(|e| format!("{name}: {e}"))
            .stage(stage)
    }
}
