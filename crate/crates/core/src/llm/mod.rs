//! Chat-completion client. Every LLM call in the crate goes through
//! [`LlmBackend::complete`], either against an OpenAI-compatible HTTP
//! endpoint or a scripted list of canned responses.

mod http;
mod scripted;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use http::HttpBackend;
pub use scripted::{Script, ScriptEntry, ScriptMatch, ScriptedBackend};

pub const DEFAULT_API_KEY_ENV: &str = "LLM_API_KEY";
pub const DEFAULT_MODEL: &str = "gpt-4o";

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LlmError {
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("script exhausted: no entry matches call {call}")]
    ScriptExhausted { call: usize },
    #[error("invalid backend config: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub system_prompt: String,
    pub user_prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub model: String,
}

impl LlmRequest {
    pub fn new(system_prompt: impl Into<String>, user_prompt: impl Into<String>) -> Self {
        LlmRequest {
            system_prompt: system_prompt.into(),
            user_prompt: user_prompt.into(),
            temperature: 0.0,
            max_tokens: 4096,
            model: DEFAULT_MODEL.to_string(),
        }
    }

    pub fn model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }

    pub fn max_tokens(mut self, n: u32) -> Self {
        self.max_tokens = n;
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub total_tokens: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub text: String,
    pub usage: Usage,
    pub latency_ms: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    HttpChat,
    Scripted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Base URL; `/chat/completions` is appended.
    pub endpoint: Option<String>,
    pub script_path: Option<PathBuf>,
    /// Name of the environment variable holding the API key. Empty means
    /// no `Authorization` header is sent.
    pub api_key_env: String,
    pub timeout: Duration,
    pub max_retries: u32,
    pub backoff_initial: Duration,
    pub backoff_multiplier: f64,
    pub max_in_flight: usize,
}

impl BackendConfig {
    pub fn http(endpoint: impl Into<String>) -> Self {
        BackendConfig {
            kind: BackendKind::HttpChat,
            endpoint: Some(endpoint.into()),
            script_path: None,
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
            timeout: Duration::from_secs(120),
            max_retries: 3,
            backoff_initial: Duration::from_millis(500),
            backoff_multiplier: 2.0,
            max_in_flight: 4,
        }
    }

    pub fn scripted(path: impl Into<PathBuf>) -> Self {
        BackendConfig {
            kind: BackendKind::Scripted,
            endpoint: None,
            script_path: Some(path.into()),
            ..BackendConfig::http("")
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        let bad = |m: &str| Err(LlmError::InvalidConfig(m.to_string()));
        match self.kind {
            BackendKind::HttpChat if self.endpoint.as_deref().is_none_or(str::is_empty) => {
                return bad("http_chat backend needs an endpoint")
            }
            BackendKind::Scripted if self.script_path.is_none() => {
                return bad("scripted backend needs a script path")
            }
            _ => {}
        }
        if self.backoff_multiplier.is_nan() || self.backoff_multiplier < 1.0 {
            return bad("backoff multiplier must be at least 1");
        }
        if self.max_in_flight == 0 {
            return bad("max_in_flight must be positive");
        }
        Ok(())
    }

    /// Sleep before each retry, in order.
    pub fn backoff_delays(&self) -> Vec<Duration> {
        let mut d = self.backoff_initial;
        (0..self.max_retries)
            .map(|_| {
                let cur = d;
                d = d.mul_f64(self.backoff_multiplier);
                cur
            })
            .collect()
    }
}

pub trait LlmBackend: Send + Sync {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError>;
}

impl<B: LlmBackend + ?Sized> LlmBackend for Arc<B> {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        (**self).complete(request)
    }
}

impl<B: LlmBackend + ?Sized> LlmBackend for Box<B> {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        (**self).complete(request)
    }
}

/// Builds the backend described by `config`.
pub fn backend_from_config(config: &BackendConfig) -> Result<Arc<dyn LlmBackend>, LlmError> {
    config.validate()?;
    Ok(match config.kind {
        BackendKind::HttpChat => Arc::new(HttpBackend::new(config.clone())?),
        BackendKind::Scripted => {
            let path = config.script_path.as_ref().expect("validated");
            Arc::new(ScriptedBackend::from_file(path)?)
        }
    })
}

/// One-shot completion. Scripted backends are reloaded per call, so keep a
/// backend from [`backend_from_config`] when replaying a multi-call script.
pub fn complete(request: &LlmRequest, config: &BackendConfig) -> Result<LlmResponse, LlmError> {
    backend_from_config(config)?.complete(request)
}
