//! The experiment as separately runnable stages over a run directory:
//! `prepare` (load, preprocess, resample), `train`, `evaluate`, `report`.

use std::collections::BTreeMap;
use std::time::Instant;

use attrition::learners::{self, FittedModel};
use attrition::metrics::{self, RenderedReport, WeightedReport};
use attrition::preprocess::fit_pipeline;
use attrition::resample::smote_oversample;
use attrition::tabular::{read_csv, SchemaPolicy, Table};
use attrition_llm::read_prediction_log;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::artifacts::*;
use crate::config::ExperimentConfig;
use crate::manifest::{ClassCounts, CountChain, RunManifest, TOOLKIT_VERSION};
use crate::{fail, llm, Result, Stage, StageContext};

/// Row label of the language-model entry in the report.
pub const LLM_REPORT_NAME: &str = "Fine-tuned LLM";

/// Files a fresh `prepare` invalidates.
const DOWNSTREAM: &[&str] = &[
    METRICS_FILE,
    REPORT_TEXT_FILE,
    REPORT_CSV_FILE,
    CORPUS_FILE,
    JOB_FILE,
    PREDICTIONS_FILE,
];

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Skip fine-tuning and prediction even when the config enables them.
    pub no_llm: bool,
}

fn millis(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Reads the dataset and returns it with the SHA-256 of its bytes.
pub fn load_dataset(config: &ExperimentConfig) -> Result<(Table, String)> {
    let bytes = std::fs::read(&config.dataset)
        .map_err(|e| format!("cannot read {}: {e}", config.dataset.display()))
        .stage(Stage::Load)?;
    let hash = hex::encode(Sha256::digest(&bytes));
    let table = read_csv(bytes.as_slice(), &SchemaPolicy::Infer).stage(Stage::Load)?;
    Ok((table, hash))
}

pub fn read_config(dir: &RunDir, stage: Stage) -> Result<ExperimentConfig> {
    dir.read_json(CONFIG_FILE, "prepare", stage)
}

pub fn read_manifest(dir: &RunDir, stage: Stage) -> Result<RunManifest> {
    dir.read_json(MANIFEST_FILE, "prepare", stage)
}

pub(crate) fn update_manifest(dir: &RunDir, stage: Stage, elapsed_ms: f64, f: impl FnOnce(&mut RunManifest)) -> Result<RunManifest> {
    let mut m = read_manifest(dir, stage)?;
    f(&mut m);
    m.wall_clock_ms.insert(stage.name().to_string(), elapsed_ms);
    dir.write_json(MANIFEST_FILE, &m, stage)?;
    Ok(m)
}

/// Load, preprocess and resample; writes the config snapshot, the fitted
/// pipeline, the prepared matrices and a fresh manifest.
pub fn prepare(config: &ExperimentConfig, dir: &RunDir) -> Result<RunManifest> {
    config.validate().stage(Stage::Config)?;
    for name in DOWNSTREAM {
        if dir.exists(name) {
            std::fs::remove_file(dir.path(name)).stage(Stage::Preprocess)?;
        }
    }
    let models = dir.path(MODELS_DIR);
    if models.is_dir() {
        std::fs::remove_dir_all(&models).stage(Stage::Preprocess)?;
    }
    let mut timings = BTreeMap::new();

    let t = Instant::now();
    let (raw, dataset_sha256) = load_dataset(config)?;
    timings.insert(Stage::Load.name().to_string(), millis(t));

    let t = Instant::now();
    let (fitted, data) = fit_pipeline(&raw, &config.pipeline_spec()).stage(Stage::Preprocess)?;
    timings.insert(Stage::Preprocess.name().to_string(), millis(t));

    let t = Instant::now();
    let balanced = smote_oversample(&data.x_train, &data.y_train, &config.smote_config()).stage(Stage::Resample)?;
    timings.insert(Stage::Resample.name().to_string(), millis(t));

    let counts = CountChain {
        stages: data.shapes.clone(),
        n_features: data.feature_names.len(),
        train_classes: ClassCounts::of(&data.y_train),
        test_classes: ClassCounts::of(&data.y_test),
        synthetic: balanced.n_synthetic,
        balanced_classes: ClassCounts::of(&balanced.y),
    };
    counts.check().stage(Stage::Resample)?;

    let prepared = PreparedArtifact {
        feature_names: data.feature_names,
        train_rows: data.train_rows,
        test_rows: data.test_rows,
        x_train: data.x_train,
        y_train: data.y_train,
        x_test: data.x_test,
        y_test: data.y_test,
        balanced_x: balanced.x,
        balanced_y: balanced.y,
        n_synthetic: balanced.n_synthetic,
    };
    let manifest = RunManifest {
        toolkit_version: TOOLKIT_VERSION.to_string(),
        config_hash: config.hash(),
        dataset_sha256,
        seeds: config.seed_plan(),
        counts,
        models: Vec::new(),
        llm: None,
        wall_clock_ms: timings,
    };
    dir.write_json(CONFIG_FILE, config, Stage::Preprocess)?;
    dir.write_bytes(PIPELINE_FILE, fitted.to_json().as_bytes(), Stage::Preprocess)?;
    dir.write_json(PREPARED_FILE, &prepared, Stage::Resample)?;
    dir.write_json(MANIFEST_FILE, &manifest, Stage::Resample)?;
    Ok(manifest)
}

/// Fits every configured learner on the balanced training set, in
/// parallel, and saves each model under `models/`.
pub fn train(dir: &RunDir) -> Result<Vec<FittedModel>> {
    let t = Instant::now();
    let config = read_config(dir, Stage::Train)?;
    let data: PreparedArtifact = dir.read_json(PREPARED_FILE, "prepare", Stage::Train)?;
    let models: Vec<FittedModel> = config
        .learners
        .par_iter()
        .map(|spec| {
            learners::fit(spec, &data.balanced_x, &data.balanced_y, config.learner_seed(spec))
                .map_err(|e| format!("{}: {e}", spec.key()))
        })
        .collect::<std::result::Result<_, _>>()
        .stage(Stage::Train)?;
    for m in &models {
        if !m.converged {
            log::warn!("{} stopped at its iteration cap", m.spec.key());
        }
        let name = format!("{MODELS_DIR}/{}.json", m.spec.key());
        dir.write_bytes(&name, &learners::save_model(m), Stage::Train)?;
    }
    update_manifest(dir, Stage::Train, millis(t), |_| ())?;
    Ok(models)
}

/// Scores each saved model on the held-out test set.
pub fn evaluate(dir: &RunDir) -> Result<Vec<ModelMetrics>> {
    let t = Instant::now();
    let config = read_config(dir, Stage::Evaluate)?;
    let data: PreparedArtifact = dir.read_json(PREPARED_FILE, "prepare", Stage::Evaluate)?;
    let mut out = Vec::with_capacity(config.learners.len());
    for spec in &config.learners {
        let name = format!("{MODELS_DIR}/{}.json", spec.key());
        let bytes = dir.read_bytes(&name, "train", Stage::Evaluate)?;
        let model = learners::load_model(&bytes)
            .map_err(|e| format!("{name}: {e}"))
            .stage(Stage::Evaluate)?;
        if &model.spec != spec {
            return fail(Stage::Evaluate, format!("{name} was trained with different hyperparameters; rerun `train`"));
        }
        let pred = model.predict(&data.x_test).stage(Stage::Evaluate)?;
        let report = metrics::evaluate(&data.y_test, &pred).stage(Stage::Evaluate)?;
        out.push(ModelMetrics {
            key: spec.key().to_string(),
            name: spec.display_name().to_string(),
            report,
            converged: model.converged,
        });
    }
    dir.write_json(METRICS_FILE, &out, Stage::Evaluate)?;
    update_manifest(dir, Stage::Evaluate, millis(t), |m| m.models = out.clone())?;
    Ok(out)
}

/// Weighted metrics of the language model's predictions, if any exist.
pub fn llm_report(dir: &RunDir) -> Result<Option<WeightedReport>> {
    if !dir.exists(PREDICTIONS_FILE) {
        return Ok(None);
    }
    let bytes = dir.read_bytes(PREDICTIONS_FILE, "llm-predict", Stage::Report)?;
    let records = read_prediction_log(bytes.as_slice()).stage(Stage::Report)?;
    let truth: Vec<u8> = records.iter().map(|r| r.true_label.class()).collect();
    let guess: Vec<u8> = records.iter().map(|r| r.predicted_class()).collect();
    Ok(Some(metrics::evaluate(&truth, &guess).stage(Stage::Report)?))
}

/// Renders `report.txt` and `report.csv` from the evaluation results. The
/// language-model row appears only when a prediction log exists.
pub fn report(dir: &RunDir) -> Result<RenderedReport> {
    let t = Instant::now();
    let results: Vec<ModelMetrics> = dir.read_json(METRICS_FILE, "evaluate", Stage::Report)?;
    let mut rows: Vec<(String, WeightedReport)> = results.into_iter().map(|m| (m.name, m.report)).collect();
    if let Some(r) = llm_report(dir)? {
        rows.push((LLM_REPORT_NAME.to_string(), r));
    }
    let rendered = metrics::render_report(&rows);
    dir.write_bytes(REPORT_TEXT_FILE, rendered.text.as_bytes(), Stage::Report)?;
    dir.write_bytes(REPORT_CSV_FILE, rendered.csv.as_bytes(), Stage::Report)?;
    if dir.exists(MANIFEST_FILE) {
        update_manifest(dir, Stage::Report, millis(t), |_| ())?;
    }
    Ok(rendered)
}

/// Every stage in order inside `config.output_dir`. The corpus is always
/// written; fine-tuning and prediction run only when enabled.
pub fn run_experiment(config: &ExperimentConfig, options: RunOptions) -> Result<RunManifest> {
    let dir = RunDir::create(&config.output_dir, Stage::Config)?;
    prepare(config, &dir)?;
    llm::prepare_corpus(&dir, None)?;
    train(&dir)?;
    evaluate(&dir)?;
    if config.llm.enabled && !options.no_llm {
        llm::finetune(&dir, None)?;
        llm::predict(&dir, None)?;
    }
    report(&dir)?;
    read_manifest(&dir, Stage::Report)
}
