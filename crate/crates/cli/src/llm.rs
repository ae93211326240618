//! Language-model stages: corpus, fine-tune, predict, and the local mock.

use std::time::{Duration, Instant};

use attrition::preprocess::FittedPipeline;
use attrition::tabular::{format_number, Table};
use attrition_llm::{
    build_records, prompt_for, to_jsonl, write_prediction_log, Backoff, Client, ClientConfig, FineTuneJob,
    JobStatus, Label, MockConfig, MockService, Parsed, PredictionRecord, PromptRecord, PROMPT_PREFIX,
};
use sha2::{Digest, Sha256};

use crate::artifacts::*;
use crate::config::{ExperimentConfig, PollProfile};
use crate::experiment::{load_dataset, read_config, update_manifest};
use crate::manifest::LlmSummary;
use crate::{fail, Result, Stage, StageContext};

fn millis(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn cleaned_table(dir: &RunDir, config: &ExperimentConfig, stage: Stage) -> Result<Table> {
    let text = dir.read_bytes(PIPELINE_FILE, "prepare", stage)?;
    let pipeline = FittedPipeline::from_json(&String::from_utf8_lossy(&text)).stage(stage)?;
    let (raw, _) = load_dataset(config)?;
    pipeline.cleaned(&raw).stage(stage)
}

/// `Name=Value` text for a row of the model-ready feature space: scaling
/// and log1p are undone, codes are decoded to the nearest category and the
/// remaining numbers are rounded to two decimals.
pub fn render_feature_row(pipeline: &FittedPipeline, row: &[f64]) -> String {
    pipeline
        .feature_names
        .iter()
        .zip(row)
        .map(|(name, &v)| {
            let mut v = match pipeline.scaler.iter().find(|p| &p.column == name) {
                Some(p) => v * p.std + p.mean,
                None => v,
            };
            if pipeline.log1p_applied.contains(name) {
                v = v.exp_m1();
            }
            let text = match pipeline.encoders.get(name) {
                Some(enc) => {
                    let last = enc.classes().len().saturating_sub(1);
                    let code = (v.round().max(0.0) as usize).min(last);
                    enc.decode(code).unwrap_or_default().to_string()
                }
                None => format_number((v * 100.0).round() / 100.0),
            };
            format!("{name}={text}")
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Writes `corpus.jsonl` from the real training rows, plus the synthetic
/// rows when requested (the override wins over the config).
pub fn prepare_corpus(dir: &RunDir, include_synthetic: Option<bool>) -> Result<LlmSummary> {
    let stage = Stage::LlmPrepare;
    let t = Instant::now();
    let config = read_config(dir, stage)?;
    let include_synthetic = include_synthetic.unwrap_or(config.llm.include_synthetic);
    let data: PreparedArtifact = dir.read_json(PREPARED_FILE, "prepare", stage)?;
    let cleaned = cleaned_table(dir, &config, stage)?;
    let labels: Vec<Label> = data.y_train.iter().map(|&c| Label::from_class(c)).collect();
    let mut records = build_records(&cleaned, &data.train_rows, &labels).stage(stage)?;
    if include_synthetic {
        let text = dir.read_bytes(PIPELINE_FILE, "prepare", stage)?;
        let pipeline = FittedPipeline::from_json(&String::from_utf8_lossy(&text)).stage(stage)?;
        for i in data.x_train.rows()..data.balanced_x.rows() {
            records.push(PromptRecord {
                prompt: format!("{PROMPT_PREFIX}{}", render_feature_row(&pipeline, data.balanced_x.row(i))),
                completion: Label::from_class(data.balanced_y[i]).as_str().to_string(),
            });
        }
    }
    let jsonl = to_jsonl(&records);
    dir.write_bytes(CORPUS_FILE, jsonl.as_bytes(), stage)?;
    let summary = LlmSummary {
        corpus_lines: records.len(),
        corpus_sha256: hex::encode(Sha256::digest(jsonl.as_bytes())),
        include_synthetic,
        fine_tuned_model: None,
        predictions: None,
        unparseable: None,
    };
    update_manifest(dir, stage, millis(t), |m| m.llm = Some(summary.clone()))?;
    Ok(summary)
}

fn client(config: &ExperimentConfig, url: Option<&str>, stage: Stage) -> Result<Client> {
    let mut cfg = ClientConfig::from_env(url.unwrap_or(&config.llm.service_url));
    cfg.base_model = config.llm.base_model.clone();
    cfg.parallelism = config.llm.parallelism;
    if config.llm.poll_profile == PollProfile::Mock {
        cfg.backoff = Backoff::mock();
        cfg.request_timeout = Duration::from_secs(30);
    }
    Client::new(cfg).stage(stage)
}

/// Uploads the corpus, runs the fine-tuning job to completion and stores
/// the job record. A failed job is an error.
pub fn finetune(dir: &RunDir, url: Option<&str>) -> Result<FineTuneJob> {
    let stage = Stage::LlmFinetune;
    let t = Instant::now();
    let config = read_config(dir, stage)?;
    let corpus = dir.read_bytes(CORPUS_FILE, "llm-prepare", stage)?;
    let corpus = String::from_utf8(corpus).stage(stage)?;
    let job = client(&config, url, stage)?
        .run_finetune(CORPUS_FILE, &corpus)
        .stage(stage)?;
    dir.write_json(JOB_FILE, &job, stage)?;
    if job.status != JobStatus::Succeeded {
        return fail(stage, format!("job {} ended as {:?}", job.id, job.status));
    }
    update_manifest(dir, stage, millis(t), |m| {
        if let Some(l) = m.llm.as_mut() {
            l.fine_tuned_model = job.fine_tuned_model.clone();
        }
    })?;
    Ok(job)
}

/// Asks the fine-tuned model about every test row and writes the
/// prediction log.
pub fn predict(dir: &RunDir, url: Option<&str>) -> Result<Vec<PredictionRecord>> {
    let stage = Stage::LlmPredict;
    let t = Instant::now();
    let config = read_config(dir, stage)?;
    let job: FineTuneJob = dir.read_json(JOB_FILE, "llm-finetune", stage)?;
    let Some(model) = job.fine_tuned_model.filter(|_| job.status == JobStatus::Succeeded) else {
        return fail(stage, format!("job {} has no fine-tuned model", job.id));
    };
    let data: PreparedArtifact = dir.read_json(PREPARED_FILE, "prepare", stage)?;
    let cleaned = cleaned_table(dir, &config, stage)?;
    let prompts: Vec<String> = data.test_rows.iter().map(|&r| prompt_for(&cleaned, r)).collect();
    let answers = client(&config, url, stage)?
        .predict_all(&model, &prompts)
        .stage(stage)?;
    let records: Vec<PredictionRecord> = answers
        .into_iter()
        .zip(data.test_rows.iter().zip(&data.y_test))
        .map(|(a, (&row, &y))| PredictionRecord {
            row_index: row,
            raw_completion: a.raw_completion,
            parsed: a.parsed,
            true_label: Label::from_class(y),
        })
        .collect();
    let mut buf = Vec::new();
    write_prediction_log(&records, &mut buf).stage(stage)?;
    dir.write_bytes(PREDICTIONS_FILE, &buf, stage)?;
    let unparseable = records.iter().filter(|r| r.parsed == Parsed::Unparseable).count();
    if unparseable > 0 {
        log::warn!("{unparseable} completions were unparseable and count as No");
    }
    update_manifest(dir, stage, millis(t), |m| {
        if let Some(l) = m.llm.as_mut() {
            l.predictions = Some(records.len());
            l.unparseable = Some(unparseable);
        }
    })?;
    Ok(records)
}

/// Runs the mock service until the process is interrupted.
pub fn serve_mock(addr: &str, config: MockConfig) -> Result<()> {
    let mock = MockService::start(addr, config).stage(Stage::LlmMock)?;
    println!("mock service listening on {}", mock.url());
    mock.serve_forever();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use attrition::preprocess::{LabelEncoder, ScalerParam};
    use std::collections::BTreeMap;

    #[test]
    fn feature_rows_are_decoded() {
        let mut encoders = BTreeMap::new();
        encoders.insert("Dept".to_string(), LabelEncoder::fit(&["HR", "Sales"]));
        let pipeline = FittedPipeline {
            format_version: attrition::preprocess::PIPELINE_FORMAT_VERSION,
            target: "Attrition".into(),
            dropped: vec![],
            skew_threshold: 0.5,
            log1p_applied: vec!["Income".into()],
            composites: vec![],
            encoders,
            feature_names: vec!["Age".into(), "Dept".into(), "Income".into()],
            scaler: vec![
                ScalerParam { column: "Age".into(), mean: 30.0, std: 5.0 },
                ScalerParam { column: "Dept".into(), mean: 0.5, std: 0.5 },
            ],
            split: attrition::preprocess::SplitSpec { test_fraction: 0.2, seed: 0 },
        };
        let text = render_feature_row(&pipeline, &[1.0, 0.8, 100f64.ln_1p()]);
        assert_eq!(text, "Age=35; Dept=Sales; Income=100");
        let text = render_feature_row(&pipeline, &[0.1234, -9.0, 0.0]);
        assert_eq!(text, "Age=30.62; Dept=HR; Income=0");
    }
}
