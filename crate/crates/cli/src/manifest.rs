use std::collections::BTreeMap;

use attrition::preprocess::StageShape;
use serde::{Deserialize, Serialize};

use crate::artifacts::ModelMetrics;
use crate::config::SeedPlan;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub negative: usize,
    pub positive: usize,
}

impl ClassCounts {
    pub fn of(labels: &[u8]) -> Self {
        let positive = labels.iter().filter(|&&l| l == 1).count();
        Self {
            negative: labels.len() - positive,
            positive,
        }
    }

    pub fn total(&self) -> usize {
        self.negative + self.positive
    }
}

/// Row and column counts from the raw table to the balanced training set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountChain {
    /// `raw`, `cleaned`, `engineered`, `train`, `test`.
    pub stages: Vec<StageShape>,
    pub n_features: usize,
    pub train_classes: ClassCounts,
    pub test_classes: ClassCounts,
    pub synthetic: usize,
    pub balanced_classes: ClassCounts,
}

impl CountChain {
    fn rows(&self, stage: &str) -> Result<usize, String> {
        self.stages
            .iter()
            .find(|s| s.stage == stage)
            .map(|s| s.rows)
            .ok_or_else(|| format!("no `{stage}` stage recorded"))
    }

    /// Checks that every stage accounts for the rows of the previous one.
    pub fn check(&self) -> Result<(), String> {
        let raw = self.rows("raw")?;
        for stage in ["cleaned", "engineered"] {
            if self.rows(stage)? != raw {
                return Err(format!("{stage} has {} rows, raw has {raw}", self.rows(stage)?));
            }
        }
        let (train, test) = (self.rows("train")?, self.rows("test")?);
        if train + test != raw {
            return Err(format!("train {train} + test {test} != raw {raw}"));
        }
        if self.train_classes.total() != train || self.test_classes.total() != test {
            return Err("class counts do not match split sizes".into());
        }
        if train + self.synthetic != self.balanced_classes.total() {
            return Err(format!(
                "train {train} + synthetic {} != balanced {}",
                self.synthetic,
                self.balanced_classes.total()
            ));
        }
        let (b, t) = (self.balanced_classes, self.train_classes);
        if b.negative < t.negative || b.positive < t.positive {
            return Err("oversampling removed rows".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmSummary {
    pub corpus_lines: usize,
    pub corpus_sha256: String,
    pub include_synthetic: bool,
    pub fine_tuned_model: Option<String>,
    pub predictions: Option<usize>,
    pub unparseable: Option<usize>,
}

/// Provenance and results of one run. Everything except `wall_clock_ms` is
/// a function of the config and the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub config_hash: String,
    pub dataset_sha256: String,
    pub seeds: SeedPlan,
    pub counts: CountChain,
    pub models: Vec<ModelMetrics>,
    pub llm: Option<LlmSummary>,
    pub wall_clock_ms: BTreeMap<String, f64>,
}

impl RunManifest {
    /// The manifest with wall-clock fields cleared, for comparisons.
    pub fn without_timings(&self) -> RunManifest {
        RunManifest {
            wall_clock_ms: BTreeMap::new(),
            ..self.clone()
        }
    }
}
