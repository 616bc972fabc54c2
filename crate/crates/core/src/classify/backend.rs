use std::collections::HashMap;
use std::io::BufRead;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use thiserror::Error;

use super::{ClassifyError, Label, ScoredPost};
use crate::corpus::PostRecord;

/// Instructions sent ahead of every post to a remote model.
pub const PROMPT: &str = include_str!("../../data/prompt.txt");

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BackendError {
    #[error("no label for post {0}")]
    NotFound(String),
    #[error("request timed out")]
    Timeout,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP status {0}")]
    Status(u16),
    #[error("no 0/1/2 label in response {0:?}")]
    Unparseable(String),
}

/// Produces a label for a single post.
///
/// Implementations are shared across worker threads by [`classify_batch`].
pub trait ClassifierBackend: Send + Sync {
    fn classify(&self, post: &PostRecord) -> Result<Label, BackendError>;

    /// Upper bound on concurrent `classify` calls.
    fn max_in_flight(&self) -> usize {
        1
    }
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub scored: Vec<ScoredPost>,
    /// Posts that received the neutral label because the backend failed.
    pub failures: usize,
}

/// Labels every post, preserving input order.
///
/// A post the backend cannot label gets `Label::NEITHER` and the failure flag.
/// If every post of a non-empty batch fails, the backend is treated as
/// unreachable and an error is returned instead.
pub fn classify_batch(
    backend: &dyn ClassifierBackend,
    posts: &[PostRecord],
) -> Result<BatchOutcome, ClassifyError> {
    let workers = backend.max_in_flight().clamp(1, posts.len().max(1));
    let next = AtomicUsize::new(0);
    let mut results: Vec<Option<Result<Label, BackendError>>> = vec![None; posts.len()];

    let chunks: Vec<Vec<(usize, Result<Label, BackendError>)>> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(post) = posts.get(i) else { break };
                        local.push((i, backend.classify(post)));
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("classifier worker panicked"))
            .collect()
    });
    for (i, r) in chunks.into_iter().flatten() {
        results[i] = Some(r);
    }

    let mut failures = 0;
    let mut first_error = None;
    let scored = posts
        .iter()
        .zip(results)
        .map(|(post, r)| match r.expect("every index visited") {
            Ok(label) => ScoredPost::new(post.clone(), label),
            Err(e) => {
                failures += 1;
                first_error.get_or_insert(e);
                ScoredPost::failed(post.clone())
            }
        })
        .collect();

    if !posts.is_empty() && failures == posts.len() {
        return Err(ClassifyError::BackendUnreachable {
            posts: posts.len(),
            first: first_error.expect("at least one failure"),
        });
    }
    Ok(BatchOutcome { scored, failures })
}

/// Labels looked up by post id from a `post_id,label` CSV.
#[derive(Debug, Clone, Default)]
pub struct LabelFileBackend {
    labels: HashMap<String, Label>,
}

impl LabelFileBackend {
    pub fn from_pairs<I: IntoIterator<Item = (String, Label)>>(pairs: I) -> Self {
        Self {
            labels: pairs.into_iter().collect(),
        }
    }

    /// Reads `post_id,label` rows. A header row starting with `post_id` is
    /// skipped.
    pub fn read<R: BufRead>(reader: R) -> Result<Self, ClassifyError> {
        let mut labels = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("post_id")) {
                continue;
            }
            let err = |message: String| ClassifyError::LabelFile {
                line: i + 1,
                message,
            };
            let (id, label) = line
                .rsplit_once(',')
                .ok_or_else(|| err("expected post_id,label".into()))?;
            let value: u8 = label
                .trim()
                .parse()
                .map_err(|_| err(format!("invalid label {label:?}")))?;
            let label = Label::new(value).map_err(|e| err(e.to_string()))?;
            labels.insert(id.trim().to_string(), label);
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Adds the labels of `other`; its entries win on shared ids.
    pub fn merge(&mut self, other: Self) {
        self.labels.extend(other.labels);
    }
}

impl ClassifierBackend for LabelFileBackend {
    fn classify(&self, post: &PostRecord) -> Result<Label, BackendError> {
        self.labels
            .get(&post.id)
            .copied()
            .ok_or_else(|| BackendError::NotFound(post.id.clone()))
    }
}

/// Sends a JSON body and returns the response body as text.
pub trait Transport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &Value,
    ) -> Result<String, BackendError>;
}

/// Blocking HTTP transport.
pub struct HttpTransport {
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        Self { agent }
    }
}

impl Transport for HttpTransport {
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &Value,
    ) -> Result<String, BackendError> {
        let mut req = self.agent.post(url);
        if let Some(token) = bearer {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = req.send_json(body).map_err(map_ureq_error)?;
        resp.body_mut().read_to_string().map_err(map_ureq_error)
    }
}

fn map_ureq_error(e: ureq::Error) -> BackendError {
    match e {
        ureq::Error::Timeout(_) => BackendError::Timeout,
        ureq::Error::StatusCode(code) => BackendError::Status(code),
        other => BackendError::Transport(other.to_string()),
    }
}

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub url: String,
    pub token: Option<String>,
    pub instructions: String,
    /// Total attempts per post.
    pub attempts: u32,
    /// Delay before the second attempt; doubles after each failure.
    pub backoff: Duration,
    pub max_in_flight: usize,
    /// `None` disables rate limiting.
    pub requests_per_second: Option<f64>,
}

impl RemoteConfig {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            token: None,
            instructions: PROMPT.to_string(),
            attempts: 3,
            backoff: Duration::from_millis(500),
            max_in_flight: 4,
            requests_per_second: None,
        }
    }

    /// Reads the bearer token from `var`, if set.
    pub fn with_token_env(mut self, var: &str) -> Self {
        self.token = std::env::var(var).ok().filter(|t| !t.is_empty());
        self
    }
}

/// Posts `{"instructions": ..., "text": ...}` to a model endpoint and reads the
/// first `0`, `1` or `2` in the reply.
pub struct RemoteBackend {
    cfg: RemoteConfig,
    transport: Box<dyn Transport>,
    next_slot: Mutex<Instant>,
}

impl RemoteBackend {
    pub fn new(cfg: RemoteConfig) -> Self {
        Self::with_transport(cfg, Box::new(HttpTransport::new(Duration::from_secs(60))))
    }

    pub fn with_transport(cfg: RemoteConfig, transport: Box<dyn Transport>) -> Self {
        Self {
            cfg,
            transport,
            next_slot: Mutex::new(Instant::now()),
        }
    }

    fn wait_for_slot(&self) {
        let Some(rps) = self.cfg.requests_per_second.filter(|r| *r > 0.0) else {
            return;
        };
        let interval = Duration::from_secs_f64(1.0 / rps);
        let wait = {
            let mut slot = self.next_slot.lock().expect("rate limiter poisoned");
            let now = Instant::now();
            let start = (*slot).max(now);
            *slot = start + interval;
            start - now
        };
        if !wait.is_zero() {
            thread::sleep(wait);
        }
    }
}

impl ClassifierBackend for RemoteBackend {
    fn classify(&self, post: &PostRecord) -> Result<Label, BackendError> {
        let body = json!({ "instructions": self.cfg.instructions, "text": post.text });
        let mut delay = self.cfg.backoff;
        let mut last = BackendError::Transport("no attempts made".into());
        for attempt in 0..self.cfg.attempts.max(1) {
            if attempt > 0 {
                thread::sleep(delay);
                delay *= 2;
            }
            self.wait_for_slot();
            match self
                .transport
                .post_json(&self.cfg.url, self.cfg.token.as_deref(), &body)
                .and_then(|reply| parse_label_reply(&reply))
            {
                Ok(label) => return Ok(label),
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    fn max_in_flight(&self) -> usize {
        self.cfg.max_in_flight
    }
}

/// Finds the label in a model reply.
///
/// JSON replies are searched in their `label`, `output`, `text` or `content`
/// string field when present (falling back to the raw body); the first
/// character among `0`, `1`, `2` wins.
pub fn parse_label_reply(reply: &str) -> Result<Label, BackendError> {
    let field = serde_json::from_str::<Value>(reply).ok().and_then(|v| {
        ["label", "output", "text", "content"]
            .iter()
            .find_map(|k| match v.get(k)? {
                Value::String(s) => Some(s.clone()),
                Value::Number(n) => Some(n.to_string()),
                _ => None,
            })
    });
    let haystack = field.as_deref().unwrap_or(reply);
    haystack
        .chars()
        .find(|c| matches!(c, '0'..='2'))
        .map(|c| Label::new(c as u8 - b'0').expect("digit in range"))
        .ok_or_else(|| BackendError::Unparseable(reply.chars().take(80).collect()))
}
