//! Experiment configuration files (TOML).
//!
//! Relative paths are resolved against the directory holding the config
//! file. Unknown keys are rejected with a spelling suggestion when one is
//! close enough.

use std::path::{Path, PathBuf};

use attrition::learners::LearnerSpec;
use attrition::preprocess::{CompositeSpec, PipelineSpec, SplitSpec};
use attrition::resample::SmoteConfig;
use attrition::seed::derive_seed;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Configuration shipped with the binary.
pub const BUNDLED_CONFIG: &str = include_str!("../configs/default.toml");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("unknown key `{key}` at line {line}{}", suggestion_text(.suggestion))]
    UnknownKey {
        key: String,
        line: usize,
        suggestion: Option<String>,
    },
    #[error("missing required key `{0}`")]
    MissingRequired(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn suggestion_text(s: &Option<String>) -> String {
    s.as_ref().map(|k| format!("; did you mean `{k}`?")).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub target: String,
    pub drop_columns: Vec<String>,
    pub skew_threshold: f64,
    pub composites: Vec<CompositeSpec>,
    pub standardize: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let spec = PipelineSpec::default();
        Self {
            target: spec.target,
            drop_columns: spec.drop_columns,
            skew_threshold: spec.skew_threshold,
            composites: spec.composites,
            standardize: spec.standardize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub test_fraction: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { test_fraction: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmoteSettings {
    pub k_neighbors: usize,
    pub target_ratio: f64,
}

impl Default for SmoteSettings {
    fn default() -> Self {
        let d = SmoteConfig::default();
        Self {
            k_neighbors: d.k_neighbors,
            target_ratio: d.target_ratio,
        }
    }
}

/// Polling and retry pacing for the fine-tuning service.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PollProfile {
    /// Seconds-scale exponential backoff for a hosted service.
    Service,
    /// Millisecond steps for the local mock.
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LlmSettings {
    /// Fine-tune and predict during `run`. The corpus is written regardless.
    pub enabled: bool,
    pub service_url: String,
    pub base_model: String,
    /// Add SMOTE rows to the corpus, rendered from the feature space.
    pub include_synthetic: bool,
    pub parallelism: usize,
    pub poll_profile: PollProfile,
}

impl Default for LlmSettings {
    fn default() -> Self {
        Self {
            enabled: false,
            service_url: "http://127.0.0.1:8089".into(),
            base_model: "gpt-3.5-turbo".into(),
            include_synthetic: false,
            parallelism: 4,
            poll_profile: PollProfile::Service,
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs/default")
}

fn default_learners() -> Vec<LearnerSpec> {
    LearnerSpec::defaults()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every random stage derives its own seed from it.
    pub seed: u64,
    pub dataset: PathBuf,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub smote: SmoteSettings,
    #[serde(default = "default_learners")]
    pub learners: Vec<LearnerSpec>,
    #[serde(default)]
    pub llm: LlmSettings,
}

/// Seeds handed to each random stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub master: u64,
    pub split: u64,
    pub smote: u64,
    pub learners: Vec<(String, u64)>,
}

impl ExperimentConfig {
    /// The bundled configuration with paths resolved against the crate's
    /// `configs` directory.
    pub fn bundled() -> Result<Self, ConfigError> {
        let base = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
        parse_config(BUNDLED_CONFIG, &base)
    }

    pub fn pipeline_spec(&self) -> PipelineSpec {
        PipelineSpec {
            target: self.pipeline.target.clone(),
            drop_columns: self.pipeline.drop_columns.clone(),
            skew_threshold: self.pipeline.skew_threshold,
            composites: self.pipeline.composites.clone(),
            split: SplitSpec {
                test_fraction: self.split.test_fraction,
                seed: self.split_seed(),
            },
            standardize: self.pipeline.standardize,
        }
    }

    pub fn smote_config(&self) -> SmoteConfig {
        SmoteConfig {
            k_neighbors: self.smote.k_neighbors,
            target_ratio: self.smote.target_ratio,
            seed: derive_seed(self.seed, "smote"),
        }
    }

    pub fn split_seed(&self) -> u64 {
        derive_seed(self.seed, "split")
    }

    pub fn learner_seed(&self, spec: &LearnerSpec) -> u64 {
        derive_seed(self.seed, &format!("learner/{}", spec.key()))
    }

    pub fn seed_plan(&self) -> SeedPlan {
        SeedPlan {
            master: self.seed,
            split: self.split_seed(),
            smote: self.smote_config().seed,
            learners: self
                .learners
                .iter()
                .map(|s| (s.key().to_string(), self.learner_seed(s)))
                .collect(),
        }
    }

    /// SHA-256 over the canonical JSON form, leaving out the dataset and
    /// output locations (the dataset is identified by its own hash).
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("dataset");
            map.remove("output_dir");
        }
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        self.pipeline_spec().validate().map_err(|e| invalid(&e))?;
        self.smote_config().validate().map_err(|e| invalid(&e))?;
        if self.learners.is_empty() {
            return Err(ConfigError::Invalid("at least one learner is required".into()));
        }
        let mut keys: Vec<&str> = Vec::new();
        for spec in &self.learners {
            spec.validate().map_err(|e| invalid(&e))?;
            if keys.contains(&spec.key()) {
                return Err(ConfigError::Invalid(format!("learner `{}` is listed twice", spec.key())));
            }
            keys.push(spec.key());
        }
        if self.llm.parallelism == 0 {
            return Err(ConfigError::Invalid("llm.parallelism must be >= 1".into()));
        }
        if !self.dataset.is_file() {
            return Err(ConfigError::Invalid(format!(
                "dataset {} does not exist",
                self.dataset.display()
            )));
        }
        Ok(())
    }
}

/// Reads, resolves and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, &base)
}

/// Parses config text, resolving relative paths against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<ExperimentConfig, ConfigError> {
    let mut config: ExperimentConfig = toml::from_str(text).map_err(|e| classify(text, &e))?;
    if config.dataset.is_relative() {
        config.dataset = base.join(&config.dataset);
    }
    if config.output_dir.is_relative() {
        config.output_dir = base.join(&config.output_dir);
    }
    config.validate()?;
    Ok(config)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Backtick-quoted words of a serde message, in order.
fn quoted(message: &str) -> Vec<&str> {
    message.split('`').skip(1).step_by(2).collect()
}

fn classify(text: &str, err: &toml::de::Error) -> ConfigError {
    let message = err.message().trim().to_string();
    let line = err.span().map_or(1, |s| line_of(text, s.start));
    if message.starts_with("unknown field") {
        let words = quoted(&message);
        let key = words.first().copied().unwrap_or_default().to_string();
        return ConfigError::UnknownKey {
            suggestion: suggest(&key, &words[1..]),
            key,
            line,
        };
    }
    if message.starts_with("missing field") {
        let key = quoted(&message).first().copied().unwrap_or_default().to_string();
        return ConfigError::MissingRequired(key);
    }
    ConfigError::ParseError { line, message }
}

/// The closest candidate by normalized Levenshtein similarity, if it is
/// similar enough to be a plausible typo.
pub fn suggest(key: &str, candidates: &[&str]) -> Option<String> {
    candidates
        .iter()
        .map(|c| (strsim::normalized_levenshtein(key, c), *c))
        .filter(|(score, _)| *score >= 0.6)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c.to_string())
}
