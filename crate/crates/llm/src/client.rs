//! Blocking HTTP+JSON client for a fine-tuning service.
//!
//! Endpoints: `POST /v1/files`, `POST /v1/fine_tuning/jobs`,
//! `GET /v1/fine_tuning/jobs/{id}` and `POST /v1/completions`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::parse::{parse_completion, Parsed};
use crate::LlmError;

pub const API_KEY_ENV: &str = "LLM_API_KEY";
pub const MAX_TOKENS: u32 = 50;

/// Exponential backoff: `initial`, multiplied by `factor` after every wait,
/// never above `cap`, giving up once `budget` has elapsed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backoff {
    pub initial: Duration,
    pub factor: u32,
    pub cap: Duration,
    pub budget: Duration,
}

impl Backoff {
    /// Pacing for a hosted service.
    pub fn service() -> Self {
        Self {
            initial: Duration::from_secs(2),
            factor: 2,
            cap: Duration::from_secs(60),
            budget: Duration::from_secs(30 * 60),
        }
    }

    /// Constant 10 ms steps, for the local mock.
    pub fn mock() -> Self {
        Self {
            initial: Duration::from_millis(10),
            factor: 1,
            cap: Duration::from_millis(10),
            budget: Duration::from_secs(10),
        }
    }

    /// The sequence of waits, stopping before the budget would be exceeded.
    pub fn delays(&self) -> impl Iterator<Item = Duration> + '_ {
        let mut next = self.initial.min(self.cap);
        let mut spent = Duration::ZERO;
        std::iter::from_fn(move || {
            if spent + next > self.budget {
                return None;
            }
            let d = next;
            spent += d;
            next = (next * self.factor).min(self.cap);
            Some(d)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientConfig {
    pub base_url: String,
    pub api_key: Option<String>,
    pub base_model: String,
    pub backoff: Backoff,
    /// Completion requests in flight at once.
    pub parallelism: usize,
    pub request_timeout: Duration,
}

impl ClientConfig {
    /// Service defaults with the credential read from `LLM_API_KEY`.
    pub fn from_env(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
            base_model: "gpt-3.5-turbo".into(),
            backoff: Backoff::service(),
            parallelism: 4,
            request_timeout: Duration::from_secs(120),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Succeeded,
    Failed,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobStatus::Succeeded | JobStatus::Failed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FineTuneJob {
    pub id: String,
    pub status: JobStatus,
    #[serde(default)]
    pub fine_tuned_model: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmPrediction {
    pub raw_completion: String,
    pub parsed: Parsed,
}

#[derive(Deserialize)]
struct FileObject {
    id: String,
}

#[derive(Deserialize)]
struct CompletionChoice {
    text: String,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<CompletionChoice>,
}

pub struct Client {
    config: ClientConfig,
    key: String,
    agent: ureq::Agent,
}

impl Client {
    /// Fails with `Auth` when no credential is configured; nothing is sent.
    pub fn new(config: ClientConfig) -> Result<Self, LlmError> {
        let key = config
            .api_key
            .clone()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| LlmError::Auth(format!("no credential; set {API_KEY_ENV}")))?;
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(config.request_timeout))
            .build()
            .into();
        Ok(Self { config, key, agent })
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.config.base_url.trim_end_matches('/'))
    }

    fn finish<T: for<'de> Deserialize<'de>>(mut resp: ureq::http::Response<ureq::Body>) -> Result<T, LlmError> {
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        match status {
            200..=299 => serde_json::from_str(&body)
                .map_err(|e| LlmError::Service { status, body: format!("unexpected body ({e}): {body}") }),
            401 | 403 => Err(LlmError::Auth(body)),
            429 => Err(LlmError::RateLimited),
            _ => Err(LlmError::Service { status, body }),
        }
    }

    fn post<T: for<'de> Deserialize<'de>>(&self, path: &str, body: &serde_json::Value) -> Result<T, LlmError> {
        let resp = self
            .agent
            .post(&self.url(path))
            .header("Authorization", &format!("Bearer {}", self.key))
            .content_type("application/json")
            .send(body.to_string())
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        Self::finish(resp)
    }

    fn get<T: for<'de> Deserialize<'de>>(&self, path: &str) -> Result<T, LlmError> {
        let resp = self
            .agent
            .get(&self.url(path))
            .header("Authorization", &format!("Bearer {}", self.key))
            .call()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        Self::finish(resp)
    }

    /// Uploads a JSONL corpus and returns the file id.
    pub fn upload_file(&self, filename: &str, jsonl: &str) -> Result<String, LlmError> {
        let body = json!({"purpose": "fine-tune", "filename": filename, "content": jsonl});
        Ok(self.post::<FileObject>("/v1/files", &body)?.id)
    }

    pub fn create_job(&self, file_id: &str) -> Result<FineTuneJob, LlmError> {
        let body = json!({"training_file": file_id, "model": self.config.base_model});
        self.post("/v1/fine_tuning/jobs", &body)
    }

    pub fn get_job(&self, job_id: &str) -> Result<FineTuneJob, LlmError> {
        self.get(&format!("/v1/fine_tuning/jobs/{job_id}"))
    }

    /// Polls until the job is terminal. A failed job is returned as is.
    pub fn wait_for_job(&self, job: FineTuneJob) -> Result<FineTuneJob, LlmError> {
        if job.status.is_terminal() {
            return Ok(job);
        }
        let started = Instant::now();
        for delay in self.config.backoff.delays() {
            thread::sleep(delay);
            let current = self.get_job(&job.id)?;
            log::debug!("job {} is {:?}", current.id, current.status);
            if current.status.is_terminal() {
                return Ok(current);
            }
        }
        Err(LlmError::Timeout(started.elapsed()))
    }

    /// Upload, create, poll.
    pub fn run_finetune(&self, filename: &str, jsonl: &str) -> Result<FineTuneJob, LlmError> {
        let file_id = self.upload_file(filename, jsonl)?;
        let job = self.create_job(&file_id)?;
        self.wait_for_job(job)
    }

    /// Raw completion text for one prompt, retrying rate-limited requests
    /// with backoff.
    pub fn complete(&self, model: &str, prompt: &str) -> Result<String, LlmError> {
        let body = json!({
            "model": model,
            "prompt": prompt,
            "max_tokens": MAX_TOKENS,
            "temperature": 0,
        });
        let mut delays = self.config.backoff.delays();
        loop {
            match self.post::<CompletionResponse>("/v1/completions", &body) {
                Ok(resp) => {
                    return resp
                        .choices
                        .into_iter()
                        .next()
                        .map(|c| c.text)
                        .ok_or_else(|| LlmError::Service {
                            status: 200,
                            body: "completion without choices".into(),
                        })
                }
                Err(LlmError::RateLimited) => match delays.next() {
                    Some(d) => thread::sleep(d),
                    None => return Err(LlmError::RateLimited),
                },
                Err(e) => return Err(e),
            }
        }
    }

    pub fn llm_predict(&self, model: &str, prompt: &str) -> Result<LlmPrediction, LlmError> {
        let raw_completion = self.complete(model, prompt)?;
        let parsed = parse_completion(&raw_completion);
        Ok(LlmPrediction { raw_completion, parsed })
    }

    /// Predictions for every prompt, in input order, with at most
    /// `parallelism` requests in flight. The first error aborts the rest.
    pub fn predict_all(&self, model: &str, prompts: &[String]) -> Result<Vec<LlmPrediction>, LlmError> {
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<LlmPrediction>>> = Mutex::new(vec![None; prompts.len()]);
        let failure: Mutex<Option<LlmError>> = Mutex::new(None);
        let workers = self.config.parallelism.max(1).min(prompts.len().max(1));
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    if failure.lock().expect("lock").is_some() {
                        return;
                    }
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= prompts.len() {
                        return;
                    }
                    match self.llm_predict(model, &prompts[i]) {
                        Ok(p) => results.lock().expect("lock")[i] = Some(p),
                        Err(e) => {
                            failure.lock().expect("lock").get_or_insert(e);
                            return;
                        }
                    }
                });
            }
        });
        if let Some(e) = failure.into_inner().expect("lock") {
            return Err(e);
        }
        Ok(results
            .into_inner()
            .expect("lock")
            .into_iter()
            .map(|p| p.expect("every prompt answered"))
            .collect())
    }
}
