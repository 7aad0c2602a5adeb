//! Completion backends.

use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Overrides the configured HTTP endpoint when set.
pub const ENDPOINT_ENV: &str = "PLANX_LLM_ENDPOINT";

/// Marker that precedes the user request on the last line of a prompt.
pub const REQUEST_MARKER: &str = "Request: ";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request timed out after {0:?}")]
    Timeout(Duration),
    #[error("no scripted reply for request {0:?}")]
    NoScriptedReply(String),
    #[error("backend configuration: {0}")]
    Config(String),
}

/// Anything that turns a prompt into model text.
pub trait CompletionBackend: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, prompt: &str) -> Result<String, BackendError>;
}

/// The request embedded in a prompt: the text after the last marker.
pub fn request_of(prompt: &str) -> &str {
    match prompt.rfind(REQUEST_MARKER) {
        Some(i) => prompt[i + REQUEST_MARKER.len()..].trim(),
        None => prompt.trim(),
    }
}

/// Hex SHA-256 of a request, usable as a scripted-reply key.
pub fn fingerprint(request: &str) -> String {
    hex::encode(Sha256::digest(request.trim().as_bytes()))
}

/// Replies from a fixed table keyed by literal request or fingerprint.
#[derive(Debug, Clone, Default)]
pub struct ScriptedBackend {
    replies: HashMap<String, String>,
}

impl ScriptedBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_json(text: &str) -> Result<Self, BackendError> {
        let replies: HashMap<String, String> =
            serde_json::from_str(text).map_err(|e| BackendError::Config(format!("scripted replies: {e}")))?;
        Ok(Self { replies })
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn with(mut self, request: impl Into<String>, reply: impl Into<String>) -> Self {
        self.replies.insert(request.into(), reply.into());
        self
    }

    pub fn len(&self) -> usize {
        self.replies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replies.is_empty()
    }
}

impl CompletionBackend for ScriptedBackend {
    fn id(&self) -> &str {
        "scripted"
    }

    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let request = request_of(prompt);
        self.replies
            .get(request)
            .or_else(|| self.replies.get(&fingerprint(request)))
            .cloned()
            .ok_or_else(|| BackendError::NoScriptedReply(request.to_string()))
    }
}

/// Generic HTTP backend: POSTs `{"prompt": ..}` plus any configured
/// parameters and reads `{"text": ..}` back.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    endpoint: String,
    timeout: Duration,
    params: Map<String, Value>,
}

impl HttpBackend {
    /// `PLANX_LLM_ENDPOINT`, when set, replaces `endpoint`.
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        let endpoint = std::env::var(ENDPOINT_ENV).unwrap_or_else(|_| endpoint.into());
        Self { endpoint, timeout, params: Map::new() }
    }

    /// Extra body fields such as `model` or `temperature`, sent unchanged.
    pub fn with_params(mut self, params: Map<String, Value>) -> Self {
        self.params = params;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

impl CompletionBackend for HttpBackend {
    fn id(&self) -> &str {
        "http"
    }

    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let mut body = self.params.clone();
        body.insert("prompt".into(), Value::String(prompt.to_string()));
        let agent = ureq::AgentBuilder::new().timeout(self.timeout).build();
        let resp = agent
            .post(&self.endpoint)
            .set("Content-Type", "application/json")
            .send_string(&Value::Object(body).to_string())
            .map_err(|e| match e {
                ureq::Error::Transport(t) if t.to_string().contains("timed out") => BackendError::Timeout(self.timeout),
                other => BackendError::Transport(other.to_string()),
            })?;
        let text = resp.into_string().map_err(|e| BackendError::Transport(e.to_string()))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| BackendError::Transport(format!("response is not JSON: {e}")))?;
        v.get("text")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| BackendError::Transport("response has no `text` field".into()))
    }
}
