//! In-process stand-in for the fine-tuning service.
//!
//! A job succeeds (or fails, if so configured) on the `polls_to_finish`-th
//! status poll. The resulting model answers every prompt of its training
//! corpus with the stored completion and anything else with `"Maybe"`.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::client::{FineTuneJob, JobStatus};
use crate::corpus::parse_jsonl;
use crate::LlmError;

pub const UNKNOWN_PROMPT_REPLY: &str = "Maybe";

const IO_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq)]
pub struct MockConfig {
    pub polls_to_finish: usize,
    pub fail_jobs: bool,
    /// When set, only this bearer token is accepted; otherwise any
    /// non-empty token is.
    pub api_key: Option<String>,
    /// Answer this many completion requests with 429 before serving.
    pub rate_limited_requests: usize,
}

impl Default for MockConfig {
    fn default() -> Self {
        Self {
            polls_to_finish: 3,
            fail_jobs: false,
            api_key: None,
            rate_limited_requests: 0,
        }
    }
}

struct Job {
    base_model: String,
    file_id: String,
    polls: usize,
    status: JobStatus,
    fine_tuned_model: Option<String>,
}

#[derive(Default)]
struct State {
    files: HashMap<String, HashMap<String, String>>,
    jobs: HashMap<String, Job>,
    models: HashMap<String, Arc<HashMap<String, String>>>,
    next_id: usize,
    rate_limited: usize,
}

struct Shared {
    config: MockConfig,
    state: Mutex<State>,
    requests: AtomicUsize,
    shutdown: AtomicBool,
}

/// Minimal HTTP/1.1 server: one thread and one request per connection.
pub struct MockService {
    addr: SocketAddr,
    url: String,
    shared: Arc<Shared>,
    acceptor: Option<JoinHandle<()>>,
}

impl MockService {
    /// Binds `addr` (use port 0 for any free port) and starts serving.
    pub fn start(addr: &str, config: MockConfig) -> Result<Self, LlmError> {
        let listener = TcpListener::bind(addr).map_err(|e| match e.kind() {
            std::io::ErrorKind::AddrInUse => LlmError::PortInUse(addr.to_string()),
            _ => LlmError::Transport(format!("cannot bind {addr}: {e}")),
        })?;
        let bound = listener
            .local_addr()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        let shared = Arc::new(Shared {
            config,
            state: Mutex::new(State::default()),
            requests: AtomicUsize::new(0),
            shutdown: AtomicBool::new(false),
        });
        let acceptor = {
            let shared = Arc::clone(&shared);
            thread::spawn(move || {
                for stream in listener.incoming() {
                    if shared.shutdown.load(Ordering::SeqCst) {
                        return;
                    }
                    match stream {
                        Ok(s) => {
                            let shared = Arc::clone(&shared);
                            thread::spawn(move || serve_connection(&shared, s));
                        }
                        Err(e) => log::warn!("mock accept error: {e}"),
                    }
                }
            })
        };
        Ok(Self {
            addr: bound,
            url: format!("http://{bound}"),
            shared,
            acceptor: Some(acceptor),
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    /// Requests received so far, including rejected ones.
    pub fn request_count(&self) -> usize {
        self.shared.requests.load(Ordering::SeqCst)
    }

    /// Blocks until the process exits.
    pub fn serve_forever(mut self) {
        if let Some(a) = self.acceptor.take() {
            let _ = a.join();
        }
    }
}

impl Drop for MockService {
    fn drop(&mut self) {
        self.shared.shutdown.store(true, Ordering::SeqCst);
        if let Some(a) = self.acceptor.take() {
            // wake the blocking accept
            let _ = TcpStream::connect(self.addr);
            let _ = a.join();
        }
    }
}

struct HttpRequest {
    method: String,
    path: String,
    authorization: Option<String>,
    body: String,
}

fn read_request(stream: &TcpStream) -> Result<HttpRequest, String> {
    let mut reader = BufReader::new(stream);
    let mut line = String::new();
    reader.read_line(&mut line).map_err(|e| e.to_string())?;
    let mut parts = line.split_whitespace();
    let (Some(method), Some(target)) = (parts.next(), parts.next()) else {
        return Err(format!("malformed request line `{}`", line.trim_end()));
    };
    let method = method.to_string();
    let path = target.split('?').next().unwrap_or("").to_string();
    let mut length = 0usize;
    let mut authorization = None;
    loop {
        line.clear();
        if reader.read_line(&mut line).map_err(|e| e.to_string())? == 0 {
            return Err("connection closed inside headers".into());
        }
        let header = line.trim_end();
        if header.is_empty() {
            break;
        }
        let Some((name, value)) = header.split_once(':') else {
            return Err(format!("malformed header `{header}`"));
        };
        let value = value.trim();
        if name.eq_ignore_ascii_case("content-length") {
            length = value.parse().map_err(|_| format!("bad content-length `{value}`"))?;
        } else if name.eq_ignore_ascii_case("authorization") {
            authorization = Some(value.to_string());
        } else if name.eq_ignore_ascii_case("transfer-encoding") {
            return Err("chunked bodies are not supported".into());
        }
    }
    let mut raw = vec![0u8; length];
    reader.read_exact(&mut raw).map_err(|e| e.to_string())?;
    let body = String::from_utf8(raw).map_err(|_| "body is not UTF-8".to_string())?;
    Ok(HttpRequest {
        method,
        path,
        authorization,
        body,
    })
}

fn reason(status: u16) -> &'static str {
    match status {
        200 => "OK",
        400 => "Bad Request",
        401 => "Unauthorized",
        404 => "Not Found",
        429 => "Too Many Requests",
        _ => "Error",
    }
}

fn write_response(mut stream: &TcpStream, status: u16, body: &Value) {
    let body = body.to_string();
    let head = format!(
        "HTTP/1.1 {status} {}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        reason(status),
        body.len()
    );
    let sent = stream
        .write_all(head.as_bytes())
        .and_then(|_| stream.write_all(body.as_bytes()))
        .and_then(|_| stream.flush());
    if let Err(e) = sent {
        log::warn!("mock failed to respond: {e}");
    }
    let _ = stream.shutdown(Shutdown::Write);
}

fn serve_connection(shared: &Shared, stream: TcpStream) {
    if shared.shutdown.load(Ordering::SeqCst) {
        return;
    }
    let _ = stream.set_read_timeout(Some(IO_TIMEOUT));
    let _ = stream.set_write_timeout(Some(IO_TIMEOUT));
    let req = match read_request(&stream) {
        Ok(r) => r,
        Err(e) => return write_response(&stream, 400, &error_body(&format!("bad request: {e}"))),
    };
    let (status, value) = handle(shared, &req);
    write_response(&stream, status, &value);
}

fn error_body(message: &str) -> Value {
    json!({"error": {"message": message}})
}

fn authorized(config: &MockConfig, req: &HttpRequest) -> bool {
    let Some(token) = req.authorization.as_deref().and_then(|h| h.strip_prefix("Bearer ")) else {
        return false;
    };
    match &config.api_key {
        Some(k) => token == k,
        None => !token.is_empty(),
    }
}

#[derive(Deserialize)]
struct Upload {
    #[allow(dead_code)]
    purpose: String,
    filename: String,
    content: String,
}

#[derive(Deserialize)]
struct CreateJob {
    training_file: String,
    model: String,
}

#[derive(Deserialize)]
struct Completion {
    model: String,
    prompt: String,
}

fn job_json(id: &str, job: &Job) -> Value {
    serde_json::to_value(FineTuneJob {
        id: id.to_string(),
        status: job.status,
        fine_tuned_model: job.fine_tuned_model.clone(),
    })
    .expect("job serializes")
}

fn handle(shared: &Shared, req: &HttpRequest) -> (u16, Value) {
    shared.requests.fetch_add(1, Ordering::SeqCst);
    if !authorized(&shared.config, req) {
        return (401, error_body("invalid or missing credential"));
    }
    route(shared, &req.method, &req.path, &req.body)
}

fn parse<T: for<'de> Deserialize<'de>>(body: &str) -> Result<T, (u16, Value)> {
    serde_json::from_str(body).map_err(|e| (400, error_body(&format!("bad request: {e}"))))
}

fn route(shared: &Shared, method: &str, path: &str, body: &str) -> (u16, Value) {
    let result = match (method, path) {
        ("POST", "/v1/files") => upload(shared, body),
        ("POST", "/v1/fine_tuning/jobs") => create_job(shared, body),
        ("GET", p) if p.starts_with("/v1/fine_tuning/jobs/") => {
            poll_job(shared, &p["/v1/fine_tuning/jobs/".len()..])
        }
        ("POST", "/v1/completions") => complete(shared, body),
        _ => Err((404, error_body("no such endpoint"))),
    };
    result.unwrap_or_else(|e| e)
}

type Routed = Result<(u16, Value), (u16, Value)>;

fn upload(shared: &Shared, body: &str) -> Routed {
    let up: Upload = parse(body)?;
    let records = parse_jsonl(&up.content).map_err(|e| (400, error_body(&e.to_string())))?;
    let answers = records.into_iter().map(|r| (r.prompt, r.completion)).collect();
    let mut st = shared.state.lock().expect("mock state");
    st.next_id += 1;
    let id = format!("file-{}", st.next_id);
    st.files.insert(id.clone(), answers);
    Ok((
        200,
        json!({"id": id, "object": "file", "bytes": up.content.len(), "filename": up.filename, "purpose": "fine-tune"}),
    ))
}

fn create_job(shared: &Shared, body: &str) -> Routed {
    let req: CreateJob = parse(body)?;
    let mut st = shared.state.lock().expect("mock state");
    if !st.files.contains_key(&req.training_file) {
        return Err((404, error_body("unknown training file")));
    }
    st.next_id += 1;
    let id = format!("ftjob-{}", st.next_id);
    let job = Job {
        base_model: req.model,
        file_id: req.training_file,
        polls: 0,
        status: JobStatus::Queued,
        fine_tuned_model: None,
    };
    let value = job_json(&id, &job);
    st.jobs.insert(id, job);
    Ok((200, value))
}

fn poll_job(shared: &Shared, id: &str) -> Routed {
    let mut st = shared.state.lock().expect("mock state");
    let st = &mut *st;
    let job = st.jobs.get_mut(id).ok_or_else(|| (404, error_body("unknown job")))?;
    if !job.status.is_terminal() {
        job.polls += 1;
        if job.polls >= shared.config.polls_to_finish {
            if shared.config.fail_jobs {
                job.status = JobStatus::Failed;
            } else {
                let model = format!("ft:{}:mock:{id}", job.base_model);
                let answers = st.files.get(&job.file_id).cloned().unwrap_or_default();
                st.models.insert(model.clone(), Arc::new(answers));
                job.status = JobStatus::Succeeded;
                job.fine_tuned_model = Some(model);
            }
        } else {
            job.status = JobStatus::Running;
        }
    }
    Ok((200, job_json(id, job)))
}

fn complete(shared: &Shared, body: &str) -> Routed {
    let req: Completion = parse(body)?;
    let answers = {
        let mut st = shared.state.lock().expect("mock state");
        if st.rate_limited < shared.config.rate_limited_requests {
            st.rate_limited += 1;
            return Err((429, error_body("rate limited")));
        }
        st.models
            .get(&req.model)
            .cloned()
            .ok_or_else(|| (404, error_body("unknown model")))?
    };
    let text = answers
        .get(&req.prompt)
        .map_or(UNKNOWN_PROMPT_REPLY, String::as_str);
    Ok((
        200,
        json!({
            "object": "text_completion",
            "model": req.model,
            "choices": [{"index": 0, "text": text, "finish_reason": "stop"}],
        }),
    ))
}
