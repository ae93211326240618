//! Seven binary classifiers behind one `fit` / `predict` contract.
//!
//! Every learner exposes a decision score: a probability for logistic
//! regression and gradient boosting, a vote fraction for KNN, trees and
//! forests, an alpha-weighted vote share for AdaBoost and a signed margin for
//! the SVM. `predict` is 1 exactly where the score exceeds 0.5 (0 for the
//! SVM margin), so exact ties go to class 0.

pub mod adaboost;
pub mod forest;
pub mod gbt;
pub mod knn;
pub mod logistic;
pub mod svm;
pub mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::seed;
use adaboost::AdaBoostModel;
use forest::{ForestModel, ForestParams};
use gbt::{GbtModel, GbtTreeParams};
use knn::{KnnIndex, KnnModel, Minkowski};
use logistic::LogisticModel;
use svm::{Kernel, SvmModel};
use tree::{GiniTreeBuilder, MaxFeatures, Tree};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum LearnError {
    #[error("training labels contain a single class")]
    SingleClassTraining,
    #[error("expected {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("label {0} is not binary")]
    NonBinaryLabel(u8),
    #[error("k = {k} exceeds the {n} stored rows")]
    KTooLarge { k: usize, n: usize },
    #[error("invalid hyperparameters: {0}")]
    InvalidSpec(String),
    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt model payload: {0}")]
    CorruptPayload(String),
}

pub type Result<T, E = LearnError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LogisticParams {
    /// Inverse L2 strength.
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnnWeights {
    Uniform,
    Distance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KnnParams {
    pub k: usize,
    pub weights: KnnWeights,
    pub minkowski_p: f64,
    pub leaf_size: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self {
            k: 10,
            weights: KnnWeights::Uniform,
            minkowski_p: 2.0,
            leaf_size: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvmKernel {
    Rbf,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaRule {
    /// `1 / (d * Var(X))`
    Scale,
    /// `1 / d`
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gamma {
    Value(f64),
    Rule(GammaRule),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmParams {
    pub kernel: SvmKernel,
    pub c: f64,
    pub gamma: Gamma,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            kernel: SvmKernel::Rbf,
            c: 200.0,
            gamma: Gamma::Rule(GammaRule::Scale),
            tol: 0.1,
            max_iter: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Gini,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecisionTreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub criterion: Criterion,
}

impl Default for DecisionTreeParams {
    fn default() -> Self {
        Self {
            max_depth: 5,
            min_samples_split: 2,
            criterion: Criterion::Gini,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
}

impl Default for RandomForestParams {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: 5,
            min_samples_split: 2,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaBoostParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        Self {
            n_estimators: 150,
            learning_rate: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradientBoostParams {
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub max_depth: usize,
    /// Columns sampled once per tree.
    pub col_subsample: MaxFeatures,
    pub lambda: f64,
    pub min_child_weight: f64,
}

impl Default for GradientBoostParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            n_estimators: 350,
            max_depth: 3,
            col_subsample: MaxFeatures::Sqrt,
            lambda: 1.0,
            min_child_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerSpec {
    LogisticRegression(LogisticParams),
    Knn(KnnParams),
    Svm(SvmParams),
    DecisionTree(DecisionTreeParams),
    RandomForest(RandomForestParams),
    #[serde(rename = "adaboost")]
    AdaBoost(AdaBoostParams),
    GradientBoost(GradientBoostParams),
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(LearnError::InvalidSpec(msg()))
    }
}

fn check_rate(lr: f64) -> Result<()> {
    check(lr > 0.0 && lr <= 1.0, || format!("learning_rate must lie in (0, 1], got {lr}"))
}

fn check_max_features(m: MaxFeatures) -> Result<()> {
    check(m != MaxFeatures::Count(0), || "max_features count must be positive".into())
}

impl LearnerSpec {
    /// All seven learners with their default hyperparameters, in report order.
    pub fn defaults() -> Vec<LearnerSpec> {
        vec![
            LearnerSpec::LogisticRegression(LogisticParams::default()),
            LearnerSpec::Knn(KnnParams::default()),
            LearnerSpec::Svm(SvmParams::default()),
            LearnerSpec::DecisionTree(DecisionTreeParams::default()),
            LearnerSpec::RandomForest(RandomForestParams::default()),
            LearnerSpec::AdaBoost(AdaBoostParams::default()),
            LearnerSpec::GradientBoost(GradientBoostParams::default()),
        ]
    }

    /// Serialized `kind` tag.
    pub fn key(&self) -> &'static str {
        match self {
            LearnerSpec::LogisticRegression(_) => "logistic_regression",
            LearnerSpec::Knn(_) => "knn",
            LearnerSpec::Svm(_) => "svm",
            LearnerSpec::DecisionTree(_) => "decision_tree",
            LearnerSpec::RandomForest(_) => "random_forest",
            LearnerSpec::AdaBoost(_) => "adaboost",
            LearnerSpec::GradientBoost(_) => "gradient_boost",
        }
    }

    /// Row label used in reports.
    pub fn display_name(&self) -> &'static str {
        match self {
            LearnerSpec::LogisticRegression(_) => "Logistic Regression",
            LearnerSpec::Knn(_) => "KNN",
            LearnerSpec::Svm(_) => "SVM",
            LearnerSpec::DecisionTree(_) => "Decision Tree",
            LearnerSpec::RandomForest(_) => "Random Forest",
            LearnerSpec::AdaBoost(_) => "AdaBoost",
            LearnerSpec::GradientBoost(_) => "XGBoost",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LearnerSpec::LogisticRegression(p) => {
                check(p.c > 0.0, || format!("C must be positive, got {}", p.c))?;
                check(p.tol > 0.0, || "tol must be positive".into())?;
                check(p.max_iter > 0, || "max_iter must be positive".into())
            }
            LearnerSpec::Knn(p) => {
                check(p.k > 0, || "k must be positive".into())?;
                check(p.leaf_size > 0, || "leaf_size must be positive".into())?;
                check(p.minkowski_p >= 1.0, || format!("minkowski_p must be >= 1, got {}", p.minkowski_p))
            }
            LearnerSpec::Svm(p) => {
                check(p.c > 0.0, || format!("C must be positive, got {}", p.c))?;
                check(p.tol > 0.0, || "tol must be positive".into())?;
                check(p.max_iter > 0, || "max_iter must be positive".into())?;
                if let Gamma::Value(g) = p.gamma {
                    check(g > 0.0, || format!("gamma must be positive, got {g}"))?;
                }
                Ok(())
            }
            LearnerSpec::DecisionTree(p) => {
                check(p.max_depth > 0, || "max_depth must be positive".into())?;
                check(p.min_samples_split >= 2, || "min_samples_split must be >= 2".into())
            }
            LearnerSpec::RandomForest(p) => {
                check(p.n_trees > 0, || "n_trees must be positive".into())?;
                check(p.max_depth > 0, || "max_depth must be positive".into())?;
                check(p.min_samples_split >= 2, || "min_samples_split must be >= 2".into())?;
                check_max_features(p.max_features)
            }
            LearnerSpec::AdaBoost(p) => {
                check(p.n_estimators > 0, || "n_estimators must be positive".into())?;
                check_rate(p.learning_rate)
            }
            LearnerSpec::GradientBoost(p) => {
                check(p.n_estimators > 0, || "n_estimators must be positive".into())?;
                check(p.max_depth > 0, || "max_depth must be positive".into())?;
                check(p.lambda >= 0.0, || "lambda must be non-negative".into())?;
                check(p.min_child_weight >= 0.0, || "min_child_weight must be non-negative".into())?;
                check_rate(p.learning_rate)?;
                check_max_features(p.col_subsample)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelParams {
    Logistic(LogisticModel),
    Knn(KnnModel),
    Svm(SvmModel),
    Tree(Tree),
    Forest(ForestModel),
    AdaBoost(AdaBoostModel),
    Gbt(GbtModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub spec: LearnerSpec,
    pub params: ModelParams,
    pub seed: u64,
    pub n_features: usize,
    /// False when an iterative solver hit its iteration cap.
    pub converged: bool,
}

fn check_training(x: &Matrix, y: &[u8]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(LearnError::LengthMismatch {
            rows: x.rows(),
            labels: y.len(),
        });
    }
    if let Some(&bad) = y.iter().find(|&&l| l > 1) {
        return Err(LearnError::NonBinaryLabel(bad));
    }
    if !(y.contains(&0) && y.contains(&1)) {
        return Err(LearnError::SingleClassTraining);
    }
    Ok(())
}

/// Fits `spec` on `(x, y)`. Deterministic for a given seed. Solvers that
/// run out of iterations still return a model, with `converged = false`.
pub fn fit(spec: &LearnerSpec, x: &Matrix, y: &[u8], seed: u64) -> Result<FittedModel> {
    spec.validate()?;
    check_training(x, y)?;
    let d = x.cols();
    let mut converged = true;
    let params = match spec {
        LearnerSpec::LogisticRegression(p) => {
            let (model, ok) = logistic::fit_logistic(x, y, p.c, p.tol, p.max_iter);
            converged = ok;
            ModelParams::Logistic(model)
        }
        LearnerSpec::Knn(p) => {
            if p.k > x.rows() {
                return Err(LearnError::KTooLarge { k: p.k, n: x.rows() });
            }
            ModelParams::Knn(KnnModel {
                index: KnnIndex::new(x.clone(), Minkowski { p: p.minkowski_p }, p.leaf_size),
                labels: y.to_vec(),
                k: p.k,
                weights: p.weights,
            })
        }
        LearnerSpec::Svm(p) => {
            let kernel = match p.kernel {
                SvmKernel::Linear => Kernel::Linear,
                SvmKernel::Rbf => Kernel::Rbf {
                    gamma: match p.gamma {
                        Gamma::Value(g) => g,
                        Gamma::Rule(GammaRule::Scale) => svm::gamma_scale(x),
                        Gamma::Rule(GammaRule::Auto) => 1.0 / d as f64,
                    },
                },
            };
            let (model, ok) = svm::fit_svm(x, y, kernel, p.c, p.tol, p.max_iter);
            converged = ok;
            ModelParams::Svm(model)
        }
        LearnerSpec::DecisionTree(p) => {
            let weights = vec![1.0; x.rows()];
            let mut rng = seed::rng(seed::derive_seed(seed, "tree/0"));
            ModelParams::Tree(
                GiniTreeBuilder {
                    x,
                    y,
                    weights: &weights,
                    max_depth: p.max_depth,
                    min_samples_split: p.min_samples_split,
                    max_features: d,
                    rng: &mut rng,
                }
                .build(),
            )
        }
        LearnerSpec::RandomForest(p) => ModelParams::Forest(forest::fit_forest(
            x,
            y,
            &ForestParams {
                n_trees: p.n_trees,
                max_depth: p.max_depth,
                min_samples_split: p.min_samples_split,
                max_features: p.max_features,
                bootstrap: p.bootstrap,
            },
            seed,
        )),
        LearnerSpec::AdaBoost(p) => {
            ModelParams::AdaBoost(adaboost::fit_adaboost(x, y, p.n_estimators, p.learning_rate, seed))
        }
        LearnerSpec::GradientBoost(p) => {
            let tree = GbtTreeParams {
                max_depth: p.max_depth,
                lambda: p.lambda,
                min_child_weight: p.min_child_weight,
                n_columns: p.col_subsample.resolve(d),
            };
            ModelParams::Gbt(gbt::fit_gbt(x, y, p.n_estimators, p.learning_rate, &tree, seed))
        }
    };
    if !converged {
        log::warn!("{} stopped at its iteration limit before converging", spec.display_name());
    }
    Ok(FittedModel {
        spec: spec.clone(),
        params,
        seed,
        n_features: d,
        converged,
    })
}

impl FittedModel {
    fn check_dims(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.n_features {
            return Err(LearnError::DimensionMismatch {
                expected: self.n_features,
                actual: x.cols(),
            });
        }
        Ok(())
    }

    /// Scores strictly above this predict class 1.
    pub fn threshold(&self) -> f64 {
        match self.params {
            ModelParams::Svm(_) => 0.0,
            _ => 0.5,
        }
    }

    fn score_row(&self, row: &[f64]) -> f64 {
        match &self.params {
            ModelParams::Logistic(m) => m.probability(row),
            ModelParams::Knn(m) => m.score(row),
            ModelParams::Svm(m) => m.margin(row),
            ModelParams::Tree(t) => t.leaf_value(row),
            ModelParams::Forest(m) => m.score(row),
            ModelParams::AdaBoost(m) => m.score(row),
            ModelParams::Gbt(m) => m.probability(row),
        }
    }

    pub fn decision_scores(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.check_dims(x)?;
        Ok(x.iter_rows().map(|r| self.score_row(r)).collect())
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<u8>> {
        let t = self.threshold();
        Ok(self
            .decision_scores(x)?
            .into_iter()
            .map(|s| u8::from(s > t))
            .collect())
    }

    /// Every tree held by the model, for structural checks.
    pub fn trees(&self) -> Vec<&Tree> {
        match &self.params {
            ModelParams::Tree(t) => vec![t],
            ModelParams::Forest(m) => m.trees.iter().collect(),
            ModelParams::AdaBoost(m) => m.stumps.iter().collect(),
            ModelParams::Gbt(m) => m.trees.iter().collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    format_version: u32,
    variant: String,
    hyperparameters: LearnerSpec,
    parameters: ModelParams,
    seed: u64,
    n_features: usize,
    converged: bool,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

/// JSON envelope holding hyperparameters and fitted parameters.
pub fn save_model(model: &FittedModel) -> Vec<u8> {
    let env = Envelope {
        format_version: MODEL_FORMAT_VERSION,
        variant: model.spec.key().to_string(),
        hyperparameters: model.spec.clone(),
        parameters: model.params.clone(),
        seed: model.seed,
        n_features: model.n_features,
        converged: model.converged,
    };
    serde_json::to_vec(&env).expect("model serialization cannot fail")
}

pub fn load_model(bytes: &[u8]) -> Result<FittedModel> {
    let probe: VersionProbe =
        serde_json::from_slice(bytes).map_err(|e| LearnError::CorruptPayload(e.to_string()))?;
    if probe.format_version != MODEL_FORMAT_VERSION {
        return Err(LearnError::VersionMismatch {
            found: probe.format_version,
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let env: Envelope = serde_json::from_slice(bytes).map_err(|e| LearnError::CorruptPayload(e.to_string()))?;
    if env.variant != env.hyperparameters.key() {
        return Err(LearnError::CorruptPayload(format!(
            "variant `{}` does not match hyperparameters `{}`",
            env.variant,
            env.hyperparameters.key()
        )));
    }
    let consistent = matches!(
        (&env.hyperparameters, &env.parameters),
        (LearnerSpec::LogisticRegression(_), ModelParams::Logistic(_))
            | (LearnerSpec::Knn(_), ModelParams::Knn(_))
            | (LearnerSpec::Svm(_), ModelParams::Svm(_))
            | (LearnerSpec::DecisionTree(_), ModelParams::Tree(_))
            | (LearnerSpec::RandomForest(_), ModelParams::Forest(_))
            | (LearnerSpec::AdaBoost(_), ModelParams::AdaBoost(_))
            | (LearnerSpec::GradientBoost(_), ModelParams::Gbt(_))
    );
    if !consistent {
        return Err(LearnError::CorruptPayload("parameters do not match variant".into()));
    }
    Ok(FittedModel {
        spec: env.hyperparameters,
        params: env.parameters,
        seed: env.seed,
        n_features: env.n_features,
        converged: env.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (Matrix, Vec<u8>) {
        let rows: Vec<[f64; 2]> = (0..30)
            .map(|i| {
                let t = f64::from(i);
                if i % 2 == 0 {
                    [t.sin() - 1.0, t.cos() - 1.0]
                } else {
                    [t.sin() + 1.0, t.cos() + 1.0]
                }
            })
            .collect();
        let y = (0..30).map(|i| u8::from(i % 2 == 1)).collect();
        (Matrix::from_rows(&rows), y)
    }

    fn small_specs() -> Vec<LearnerSpec> {
        vec![
            LearnerSpec::LogisticRegression(LogisticParams::default()),
            LearnerSpec::Knn(KnnParams { k: 3, ..KnnParams::default() }),
            LearnerSpec::Svm(SvmParams {
                tol: 1e-3,
                ..SvmParams::default()
            }),
            LearnerSpec::DecisionTree(DecisionTreeParams::default()),
            LearnerSpec::RandomForest(RandomForestParams {
                n_trees: 15,
                ..RandomForestParams::default()
            }),
            LearnerSpec::AdaBoost(AdaBoostParams {
                n_estimators: 20,
                learning_rate: 0.5,
            }),
            LearnerSpec::GradientBoost(GradientBoostParams {
                n_estimators: 40,
                learning_rate: 0.3,
                ..GradientBoostParams::default()
            }),
        ]
    }

    #[test]
    fn every_learner_separates_blobs_and_round_trips() {
        let (x, y) = blobs();
        for spec in small_specs() {
            let m = fit(&spec, &x, &y, 7).unwrap();
            let pred = m.predict(&x).unwrap();
            let acc = pred.iter().zip(&y).filter(|(a, b)| a == b).count();
            assert!(acc >= 28, "{}: {acc}/30", spec.key());
            let back = load_model(&save_model(&m)).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.decision_scores(&x).unwrap(), m.decision_scores(&x).unwrap());
            assert_eq!(m, fit(&spec, &x, &y, 7).unwrap());
        }
    }

    #[test]
    fn dimension_checks() {
        let (x, y) = blobs();
        let m = fit(&LearnerSpec::DecisionTree(DecisionTreeParams::default()), &x, &y, 0).unwrap();
        let wide = Matrix::zeros(2, 3);
        assert_eq!(
            m.predict(&wide),
            Err(LearnError::DimensionMismatch { expected: 2, actual: 3 })
        );
        assert_eq!(
            fit(&LearnerSpec::DecisionTree(DecisionTreeParams::default()), &x, &[1; 30], 0),
            Err(LearnError::SingleClassTraining)
        );
    }

    #[test]
    fn zero_weight_logistic_scores_half() {
        let m = FittedModel {
            spec: LearnerSpec::LogisticRegression(LogisticParams::default()),
            params: ModelParams::Logistic(LogisticModel {
                weights: vec![0.0, 0.0],
                bias: 0.0,
            }),
            seed: 0,
            n_features: 2,
            converged: true,
        };
        let x = Matrix::from_rows(&[[3.0, -1.0], [0.0, 9.0]]);
        assert_eq!(m.decision_scores(&x).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn single_tree_forest_equals_decision_tree() {
        let (x, y) = blobs();
        let forest = LearnerSpec::RandomForest(RandomForestParams {
            n_trees: 1,
            bootstrap: false,
            max_features: MaxFeatures::All,
            ..RandomForestParams::default()
        });
        let tree = LearnerSpec::DecisionTree(DecisionTreeParams::default());
        let a = fit(&forest, &x, &y, 3).unwrap();
        let b = fit(&tree, &x, &y, 3).unwrap();
        assert_eq!(a.predict(&x).unwrap(), b.predict(&x).unwrap());
    }

    #[test]
    fn payload_errors() {
        let (x, y) = blobs();
        let m = fit(&LearnerSpec::DecisionTree(DecisionTreeParams::default()), &x, &y, 0).unwrap();
        let bytes = save_model(&m);
        assert!(matches!(
            load_model(&bytes[..bytes.len() / 2]),
            Err(LearnError::CorruptPayload(_))
        ));
        let bumped = String::from_utf8(bytes)
            .unwrap()
            .replacen("\"format_version\":1", "\"format_version\":2", 1);
        assert_eq!(
            load_model(bumped.as_bytes()),
            Err(LearnError::VersionMismatch { found: 2, expected: 1 })
        );
    }

    #[test]
    fn spec_validation_and_serde() {
        let bad = LearnerSpec::AdaBoost(AdaBoostParams {
            learning_rate: 1.5,
            ..AdaBoostParams::default()
        });
        assert!(matches!(bad.validate(), Err(LearnError::InvalidSpec(_))));
        let json = r#"{"kind":"svm","c":10.0,"gamma":"scale"}"#;
        let spec: LearnerSpec = serde_json::from_str(json).unwrap();
        assert_eq!(
            spec,
            LearnerSpec::Svm(SvmParams {
                c: 10.0,
                ..SvmParams::default()
            })
        );
        let json = r#"{"kind":"svm","gamma":0.25}"#;
        let LearnerSpec::Svm(p) = serde_json::from_str(json).unwrap() else {
            panic!("wrong variant");
        };
        assert_eq!(p.gamma, Gamma::Value(0.25));
        assert!(serde_json::from_str::<LearnerSpec>(r#"{"kind":"knn","kk":3}"#).is_err());
        for spec in LearnerSpec::defaults() {
            spec.validate().unwrap();
            let text = serde_json::to_string(&spec).unwrap();
            assert_eq!(serde_json::from_str::<LearnerSpec>(&text).unwrap(), spec);
        }
    }
}
