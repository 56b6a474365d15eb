//! Chat-completion endpoints: live HTTP, scripted queues and request-hash fixtures.

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ingestion::hub::RetryPolicy;

#[derive(Debug, Error)]
pub enum EndpointError {
    #[error("invalid endpoint configuration: {0}")]
    Config(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed completion response: {0}")]
    Decode(String),
    #[error("no fixture for request {key} (expected {path})")]
    MissingFixture { key: String, path: String },
    #[error("scripted endpoint has no responses left")]
    Exhausted,
}

impl EndpointError {
    fn is_retryable(&self) -> bool {
        match self {
            EndpointError::Transport(_) => true,
            EndpointError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentEndpointConfig {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub credential_env: String,
    pub timeout: Duration,
    pub max_retries: u32,
    pub temperature: f64,
}

impl AgentEndpointConfig {
    pub const DEFAULT_CREDENTIAL_ENV: &'static str = "LICHAIN_API_KEY";

    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        AgentEndpointConfig {
            base_url: base_url.into(),
            model: model.into(),
            credential_env: Self::DEFAULT_CREDENTIAL_ENV.to_string(),
            timeout: Duration::from_secs(120),
            max_retries: 2,
            temperature: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), EndpointError> {
        if self.timeout.is_zero() {
            return Err(EndpointError::Config("timeout must be positive".into()));
        }
        if self.model.trim().is_empty() {
            return Err(EndpointError::Config("model name is empty".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(EndpointError::Config(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "user".into(),
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "assistant".into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
}

impl ChatRequest {
    /// Hex SHA-256 of the request's compact JSON; names fixture files.
    pub fn key(&self) -> String {
        let canonical = serde_json::to_string(self).expect("request serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// Something that answers a chat request with the first choice's text.
pub trait ChatEndpoint: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, EndpointError>;
}

impl<E: ChatEndpoint + ?Sized> ChatEndpoint for &E {
    fn complete(&self, request: &ChatRequest) -> Result<String, EndpointError> {
        (**self).complete(request)
    }
}

impl<E: ChatEndpoint + ?Sized> ChatEndpoint for Box<E> {
    fn complete(&self, request: &ChatRequest) -> Result<String, EndpointError> {
        (**self).complete(request)
    }
}

/// OpenAI-style `POST {base_url}/chat/completions`.
pub struct HttpChatEndpoint {
    url: String,
    credential: Option<String>,
    retry: RetryPolicy,
    agent: ureq::Agent,
}

impl HttpChatEndpoint {
    pub fn new(config: &AgentEndpointConfig) -> Result<Self, EndpointError> {
        config.validate()?;
        if config.base_url.trim().is_empty() {
            return Err(EndpointError::Config("endpoint URL is empty".into()));
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpChatEndpoint {
            url: format!("{}/chat/completions", config.base_url.trim_end_matches('/')),
            credential: std::env::var(&config.credential_env)
                .ok()
                .filter(|k| !k.is_empty()),
            retry: RetryPolicy {
                max_retries: config.max_retries,
                ..RetryPolicy::default()
            },
            agent,
        })
    }

    fn attempt(&self, request: &ChatRequest) -> Result<String, EndpointError> {
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.credential {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let body = json!({
            "model": request.model,
            "messages": request.messages,
            "temperature": request.temperature,
        });
        let mut resp = req
            .send_json(&body)
            .map_err(|e| EndpointError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        if status != 200 {
            let body = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(EndpointError::Status { status, body });
        }
        let value: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| EndpointError::Decode(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| EndpointError::Decode("missing choices[0].message.content".into()))
    }
}

impl ChatEndpoint for HttpChatEndpoint {
    fn complete(&self, request: &ChatRequest) -> Result<String, EndpointError> {
        let mut attempt = 0;
        loop {
            match self.attempt(request) {
                Err(e) if e.is_retryable() && attempt < self.retry.max_retries => {
                    let delay = self.retry.delay(attempt);
                    log::debug!("chat request failed ({e}); retrying in {delay:?}");
                    std::thread::sleep(delay);
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

/// Replays canned responses in order and records every request.
#[derive(Debug, Default)]
pub struct ScriptedEndpoint {
    responses: Mutex<VecDeque<String>>,
    requests: Mutex<Vec<ChatRequest>>,
}

impl ScriptedEndpoint {
    pub fn new<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        ScriptedEndpoint {
            responses: Mutex::new(responses.into_iter().map(Into::into).collect()),
            requests: Mutex::new(Vec::new()),
        }
    }

    pub fn requests(&self) -> Vec<ChatRequest> {
        self.requests.lock().expect("requests").clone()
    }

    pub fn remaining(&self) -> usize {
        self.responses.lock().expect("responses").len()
    }
}

impl ChatEndpoint for ScriptedEndpoint {
    fn complete(&self, request: &ChatRequest) -> Result<String, EndpointError> {
        self.requests
            .lock()
            .expect("requests")
            .push(request.clone());
        self.responses
            .lock()
            .expect("responses")
            .pop_front()
            .ok_or(EndpointError::Exhausted)
    }
}

/// Answers from `<dir>/<request key>.txt`.
#[derive(Debug, Clone)]
pub struct FixtureEndpoint {
    dir: PathBuf,
}

impl FixtureEndpoint {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureEndpoint { dir: dir.into() }
    }

    pub fn path_for(dir: &Path, request: &ChatRequest) -> PathBuf {
        dir.join(format!("{}.txt", request.key()))
    }
}

impl ChatEndpoint for FixtureEndpoint {
    fn complete(&self, request: &ChatRequest) -> Result<String, EndpointError> {
        let path = Self::path_for(&self.dir, request);
        std::fs::read_to_string(&path).map_err(|_| EndpointError::MissingFixture {
            key: request.key(),
            path: path.display().to_string(),
        })
    }
}

/// Forwards to `inner` and stores each response as a fixture file.
pub struct RecordingEndpoint<E> {
    inner: E,
    dir: PathBuf,
}

impl<E: ChatEndpoint> RecordingEndpoint<E> {
    pub fn new(inner: E, dir: impl Into<PathBuf>) -> Self {
        RecordingEndpoint {
            inner,
            dir: dir.into(),
        }
    }
}

impl<E: ChatEndpoint> ChatEndpoint for RecordingEndpoint<E> {
    fn complete(&self, request: &ChatRequest) -> Result<String, EndpointError> {
        let response = self.inner.complete(request)?;
        let path = FixtureEndpoint::path_for(&self.dir, request);
        std::fs::create_dir_all(&self.dir)
            .and_then(|_| std::fs::write(&path, &response))
            .map_err(|e| EndpointError::Transport(format!("recording {}: {e}", path.display())))?;
        Ok(response)
    }
}
