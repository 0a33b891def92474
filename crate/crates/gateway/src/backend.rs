//! LLM backend adapters: a deterministic recording mock and an HTTP client.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::tokenize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    #[error("simulated backend failure")]
    Simulated,
    #[error("backend request failed after retry: {0}")]
    Transport(String),
    #[error("backend returned an unusable body: {0}")]
    Body(String),
}

pub trait Backend: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, BackendError>;
}

/// Echoes its prompt and records every input it receives.
#[derive(Debug, Default)]
pub struct MockBackend {
    fail: AtomicBool,
    calls: Mutex<Vec<String>>,
}

impl MockBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_failing(&self, on: bool) {
        self.fail.store(on, Ordering::SeqCst);
    }

    pub fn calls(&self) -> Vec<String> {
        self.calls.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn call_count(&self) -> usize {
        self.calls.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn echo(prompt: &str) -> String {
        format!("ECHO(n_tokens={}): {prompt}", tokenize(prompt).len())
    }
}

impl Backend for MockBackend {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        self.calls.lock().unwrap_or_else(|e| e.into_inner()).push(prompt.to_string());
        if self.fail.load(Ordering::SeqCst) {
            return Err(BackendError::Simulated);
        }
        Ok(Self::echo(prompt))
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    prompt: &'a str,
}

#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

/// POSTs `{"prompt": ...}` and expects `{"text": ...}`. One retry on
/// transport errors or non-2xx status.
pub struct HttpBackend {
    url: String,
    credential: Option<String>,
    agent: ureq::Agent,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend").field("url", &self.url).finish_non_exhaustive()
    }
}

impl HttpBackend {
    pub fn new(url: impl Into<String>, credential: Option<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        Self {
            url: url.into(),
            credential,
            agent,
        }
    }

    fn attempt(&self, prompt: &str) -> Result<String, BackendError> {
        let mut req = self.agent.post(&self.url);
        if let Some(c) = &self.credential {
            req = req.header("Authorization", &format!("Bearer {c}"));
        }
        let mut resp = req
            .send_json(CompletionRequest { prompt })
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let body: CompletionResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::Body(e.to_string()))?;
        Ok(body.text)
    }
}

impl Backend for HttpBackend {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        match self.attempt(prompt) {
            Err(BackendError::Transport(_)) => self.attempt(prompt),
            other => other,
        }
    }
}
