use serde::{Deserialize, Serialize};

use super::encode::{encode_categoricals, replay_encoding, EncoderMaps};
use super::scale::{apply_scaler, standardize, ScalerParam};
use super::skew::{apply_log1p, apply_log1p_where_skewed, engineer_composites, CompositeSpec};
use super::split::stratified_split;
use super::{drop_columns, PreprocessError, Result};
use crate::matrix::Matrix;
use crate::tabular::{ColumnRole, Table};

pub const PIPELINE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
}

/// Declarative description of the preprocessing steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSpec {
    pub target: String,
    pub drop_columns: Vec<String>,
    pub skew_threshold: f64,
    pub composites: Vec<CompositeSpec>,
    pub split: SplitSpec,
    pub standardize: bool,
}

impl Default for PipelineSpec {
    /// The IBM HR attrition setup: drop the constant and identifier columns,
    /// log1p above skewness 0.5, two averaged composites, 80/20 split.
    fn default() -> Self {
        let strings = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        Self {
            target: "Attrition".into(),
            drop_columns: strings(&["EmployeeCount", "StandardHours", "Over18", "EmployeeNumber"]),
            skew_threshold: 0.5,
            composites: vec![
                CompositeSpec {
                    name: "WorkExperience".into(),
                    sources: strings(&[
                        "TotalWorkingYears",
                        "YearsAtCompany",
                        "YearsInCurrentRole",
                        "YearsSinceLastPromotion",
                        "YearsWithCurrManager",
                    ]),
                },
                CompositeSpec {
                    name: "OverallSatisfaction".into(),
                    sources: strings(&[
                        "JobSatisfaction",
                        "EnvironmentSatisfaction",
                        "RelationshipSatisfaction",
                        "WorkLifeBalance",
                    ]),
                },
            ],
            split: SplitSpec {
                test_fraction: 0.2,
                seed: 42,
            },
            standardize: true,
        }
    }
}

impl PipelineSpec {
    pub fn validate(&self) -> Result<()> {
        let f = self.split.test_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(PreprocessError::InvalidSpec(format!(
                "test_fraction must lie in (0, 1), got {f}"
            )));
        }
        if !(self.skew_threshold >= 0.0) {
            return Err(PreprocessError::InvalidSpec(format!(
                "skew_threshold must be >= 0, got {}",
                self.skew_threshold
            )));
        }
        for c in &self.composites {
            if let Some(s) = c.sources.iter().find(|s| self.drop_columns.contains(s)) {
                return Err(PreprocessError::InvalidSpec(format!(
                    "composite `{}` uses dropped column `{s}`",
                    c.name
                )));
            }
        }
        if self.drop_columns.contains(&self.target) {
            return Err(PreprocessError::InvalidSpec(format!(
                "target `{}` is listed in drop_columns",
                self.target
            )));
        }
        Ok(())
    }
}

/// Row and column counts after a pipeline stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageShape {
    pub stage: String,
    pub rows: usize,
    pub cols: usize,
}

/// Model-ready matrices produced by fitting or replaying a pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub feature_names: Vec<String>,
    pub x_train: Matrix,
    pub x_test: Matrix,
    pub y_train: Vec<u8>,
    pub y_test: Vec<u8>,
    /// Row indices into the raw table.
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub shapes: Vec<StageShape>,
}

/// Everything learned while fitting, enough to replay the transformation
/// on the raw table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub format_version: u32,
    pub target: String,
    pub dropped: Vec<String>,
    pub skew_threshold: f64,
    pub log1p_applied: Vec<String>,
    pub composites: Vec<CompositeSpec>,
    pub encoders: EncoderMaps,
    pub feature_names: Vec<String>,
    pub scaler: Vec<ScalerParam>,
    pub split: SplitSpec,
}

fn shape(stage: &str, t: &Table) -> StageShape {
    StageShape {
        stage: stage.to_string(),
        rows: t.n_rows(),
        cols: t.n_cols(),
    }
}

fn labels_of(encoded: &Table, target: &str) -> Result<Vec<u8>> {
    encoded
        .numeric(target)?
        .iter()
        .map(|&code| {
            u8::try_from(code as usize).map_err(|_| {
                PreprocessError::InvalidSpec(format!("target `{target}` has more than 256 classes"))
            })
        })
        .collect()
}

fn to_matrix(t: &Table) -> Result<Matrix> {
    let mut data = Vec::with_capacity(t.n_rows() * t.n_cols());
    let cols = t
        .names()
        .map(|n| t.numeric(n))
        .collect::<Result<Vec<_>, _>>()?;
    for row in 0..t.n_rows() {
        data.extend(cols.iter().map(|c| c[row]));
    }
    Ok(Matrix::new(t.n_rows(), t.n_cols(), data).expect("shape follows table"))
}

/// Runs drop, log1p, composites, encoding, stratified split and scaling, in
/// that order, on `raw`.
pub fn fit_pipeline(raw: &Table, spec: &PipelineSpec) -> Result<(FittedPipeline, PreparedData)> {
    spec.validate()?;
    let mut shapes = vec![shape("raw", raw)];
    let table = raw.clone().with_role(&spec.target, ColumnRole::Target)?;

    let cleaned = drop_columns(&table, &spec.drop_columns)?;
    shapes.push(shape("cleaned", &cleaned));

    let (logged, log1p_applied) = apply_log1p_where_skewed(&cleaned, spec.skew_threshold)?;
    let composed = engineer_composites(&logged, &spec.composites)?;
    shapes.push(shape("engineered", &composed));

    let (encoded, encoders) = encode_categoricals(&composed)?;
    let y = labels_of(&encoded, &spec.target)?;
    let features = encoded.without_columns(&[spec.target.as_str()])?;
    let feature_names: Vec<String> = features.names().map(str::to_string).collect();

    let split = stratified_split(&features, &y, spec.split.test_fraction, spec.split.seed)?;
    shapes.push(shape("train", &split.x_train));
    shapes.push(shape("test", &split.x_test));

    let (x_train, x_test, scaler) = if spec.standardize {
        standardize(&split.x_train, &split.x_test)?
    } else {
        (split.x_train, split.x_test, Vec::new())
    };

    let fitted = FittedPipeline {
        format_version: PIPELINE_FORMAT_VERSION,
        target: spec.target.clone(),
        dropped: spec.drop_columns.clone(),
        skew_threshold: spec.skew_threshold,
        log1p_applied,
        composites: spec.composites.clone(),
        encoders,
        feature_names: feature_names.clone(),
        scaler,
        split: spec.split.clone(),
    };
    let prepared = PreparedData {
        feature_names,
        x_train: to_matrix(&x_train)?,
        x_test: to_matrix(&x_test)?,
        y_train: split.y_train,
        y_test: split.y_test,
        train_rows: split.train_rows,
        test_rows: split.test_rows,
        shapes,
    };
    Ok((fitted, prepared))
}

impl FittedPipeline {
    fn check_version(&self) -> Result<()> {
        if self.format_version != PIPELINE_FORMAT_VERSION {
            return Err(PreprocessError::VersionMismatch {
                found: self.format_version,
                expected: PIPELINE_FORMAT_VERSION,
            });
        }
        Ok(())
    }

    /// The raw table with the target marked and the dropped columns removed;
    /// values are still human readable.
    pub fn cleaned(&self, raw: &Table) -> Result<Table> {
        let table = raw.clone().with_role(&self.target, ColumnRole::Target)?;
        drop_columns(&table, &self.dropped)
    }

    /// Encoded, unscaled features and labels for every row of `raw`.
    fn encode_all(&self, raw: &Table) -> Result<(Table, Vec<u8>)> {
        self.check_version()?;
        let cleaned = self.cleaned(raw)?;
        let logged = apply_log1p(&cleaned, &self.log1p_applied)?;
        let composed = engineer_composites(&logged, &self.composites)?;
        let encoded = replay_encoding(&composed, &self.encoders)?;
        let y = labels_of(&encoded, &self.target)?;
        let features = encoded.without_columns(&[self.target.as_str()])?;
        let names: Vec<&str> = features.names().collect();
        if names != self.feature_names {
            return Err(PreprocessError::InvalidSpec(format!(
                "replayed features {names:?} differ from fitted {:?}",
                self.feature_names
            )));
        }
        Ok((features, y))
    }

    /// Re-runs every step with the recorded state, including the seeded
    /// split, and reproduces the fitted matrices bit for bit.
    pub fn replay(&self, raw: &Table) -> Result<PreparedData> {
        let mut shapes = vec![shape("raw", raw)];
        shapes.push(shape("cleaned", &self.cleaned(raw)?));
        let (features, y) = self.encode_all(raw)?;
        shapes.push(StageShape {
            stage: "engineered".into(),
            rows: features.n_rows(),
            cols: features.n_cols() + 1,
        });
        let split = stratified_split(&features, &y, self.split.test_fraction, self.split.seed)?;
        shapes.push(shape("train", &split.x_train));
        shapes.push(shape("test", &split.x_test));
        let x_train = apply_scaler(&split.x_train, &self.scaler)?;
        let x_test = apply_scaler(&split.x_test, &self.scaler)?;
        Ok(PreparedData {
            feature_names: self.feature_names.clone(),
            x_train: to_matrix(&x_train)?,
            x_test: to_matrix(&x_test)?,
            y_train: split.y_train,
            y_test: split.y_test,
            train_rows: split.train_rows,
            test_rows: split.test_rows,
            shapes,
        })
    }

    /// Transforms every row of a raw-schema table without splitting.
    pub fn transform(&self, raw: &Table) -> Result<(Matrix, Vec<u8>)> {
        let (features, y) = self.encode_all(raw)?;
        let scaled = apply_scaler(&features, &self.scaler)?;
        Ok((to_matrix(&scaled)?, y))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pipeline serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| PreprocessError::InvalidSpec(format!("corrupt pipeline: {e}")))?;
        let found = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| PreprocessError::InvalidSpec("missing format_version".into()))?;
        if found != u64::from(PIPELINE_FORMAT_VERSION) {
            return Err(PreprocessError::VersionMismatch {
                found: found as u32,
                expected: PIPELINE_FORMAT_VERSION,
            });
        }
        serde_json::from_value(value)
            .map_err(|e| PreprocessError::InvalidSpec(format!("corrupt pipeline: {e}")))
    }
}
