//! Completion endpoint client and the built-in mock models.

use std::thread;
use std::time::{Duration, Instant};

use planbench::encoding::format_plan;
use planbench::generators::DatasetRecord;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const DEFAULT_TOKEN_ENV: &str = "PLANBENCH_API_TOKEN";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    /// Delay before the second attempt; doubles after each retry.
    pub backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            backoff_ms: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub base_url: String,
    /// Environment variable holding the bearer token; `None` sends no
    /// authorization header.
    pub token_env: Option<String>,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: f64,
    pub retry: RetryPolicy,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        EndpointConfig {
            base_url: base_url.into(),
            token_env: Some(DEFAULT_TOKEN_ENV.to_owned()),
            model: model.into(),
            temperature: 0.2,
            max_tokens: 512,
            timeout_secs: 60.0,
            retry: RetryPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ClientError> {
        let bad = |m: &str| Err(ClientError::InvalidConfig(m.to_owned()));
        if !(0.0..=2.0).contains(&self.temperature) {
            return bad("temperature must lie in [0, 2]");
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return bad("timeout must be positive");
        }
        if self.retry.max_attempts == 0 {
            return bad("at least one attempt is required");
        }
        if self.base_url.is_empty() {
            return bad("base URL is empty");
        }
        Ok(())
    }

    /// SHA-256 of the JSON form. The token itself never enters the config.
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(
            serde_json::to_vec(self).expect("config serializes"),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("invalid endpoint config: {0}")]
    InvalidConfig(String),
    #[error("environment variable {0} is not set")]
    MissingToken(String),
    #[error("authentication rejected (HTTP {0})")]
    Auth(u16),
    #[error("request failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    /// Client wall clock around the request that produced the text.
    pub seconds: f64,
}

/// Text of a completion response. Accepts `{"text": ..}`,
/// `{"completion": ..}` and the common `choices` layouts.
pub fn extract_text(body: &str) -> Result<String, ClientError> {
    let v: Value = serde_json::from_str(body).map_err(|e| ClientError::Malformed(e.to_string()))?;
    let choice = v.get("choices").and_then(|c| c.get(0));
    let text = [
        v.get("text"),
        v.get("completion"),
        choice.and_then(|c| c.get("text")),
        choice
            .and_then(|c| c.get("message"))
            .and_then(|m| m.get("content")),
    ]
    .into_iter()
    .flatten()
    .find_map(Value::as_str)
    .map(str::to_owned);
    text.ok_or_else(|| ClientError::Malformed("no completion text in response".into()))
}

enum Attempt {
    Done(Result<Completion, ClientError>),
    Retry(String),
}

/// Sends one prompt and returns the completion.
///
/// Transport failures, HTTP 429 and 5xx are retried per the policy; other
/// statuses fail at once.
pub fn query_model(config: &EndpointConfig, prompt: &str) -> Result<Completion, ClientError> {
    config.validate()?;
    let token = match &config.token_env {
        Some(var) => Some(std::env::var(var).map_err(|_| ClientError::MissingToken(var.clone()))?),
        None => None,
    };
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
        .http_status_as_error(false)
        .build()
        .into();
    let body = serde_json::json!({
        "model": config.model,
        "prompt": prompt,
        "temperature": config.temperature,
        "max_tokens": config.max_tokens,
    })
    .to_string();

    let mut last = String::new();
    for attempt in 1..=config.retry.max_attempts {
        if attempt > 1 {
            thread::sleep(Duration::from_millis(
                config.retry.backoff_ms << (attempt - 2).min(16),
            ));
        }
        match send(&agent, config, token.as_deref(), &body) {
            Attempt::Done(r) => return r,
            Attempt::Retry(msg) => last = msg,
        }
    }
    Err(ClientError::Transport {
        attempts: config.retry.max_attempts,
        message: last,
    })
}

fn send(agent: &ureq::Agent, config: &EndpointConfig, token: Option<&str>, body: &str) -> Attempt {
    let mut req = agent
        .post(&config.base_url)
        .header("content-type", "application/json");
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let start = Instant::now();
    let mut resp = match req.send(body) {
        Ok(r) => r,
        Err(e) => return Attempt::Retry(e.to_string()),
    };
    let text = match resp.body_mut().read_to_string() {
        Ok(t) => t,
        Err(e) => return Attempt::Retry(e.to_string()),
    };
    let seconds = start.elapsed().as_secs_f64();
    let status = resp.status().as_u16();
    match status {
        200..=299 => Attempt::Done(extract_text(&text).map(|text| Completion { text, seconds })),
        401 | 403 => Attempt::Done(Err(ClientError::Auth(status))),
        429 | 500..=599 => Attempt::Retry(format!("HTTP {status}")),
        _ => Attempt::Done(Err(ClientError::Status { status, body: text })),
    }
}

/// Anything that turns a prompt for a dataset record into text.
pub trait Model: Sync {
    fn name(&self) -> &str;
    fn complete(&self, record: &DatasetRecord, prompt: &str) -> Result<Completion, ClientError>;
    /// Endpoint settings, when there is an endpoint.
    fn config(&self) -> Option<&EndpointConfig> {
        None
    }
}

pub struct HttpModel {
    pub config: EndpointConfig,
}

impl Model for HttpModel {
    fn name(&self) -> &str {
        &self.config.model
    }

    fn complete(&self, _record: &DatasetRecord, prompt: &str) -> Result<Completion, ClientError> {
        query_model(&self.config, prompt)
    }

    fn config(&self) -> Option<&EndpointConfig> {
        Some(&self.config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockModel {
    /// Answers with the record's reference plan.
    OptimalEcho,
    /// Answers with nothing.
    Empty,
}

impl Model for MockModel {
    fn name(&self) -> &str {
        match self {
            MockModel::OptimalEcho => "mock-optimal-echo",
            MockModel::Empty => "mock-empty",
        }
    }

    fn complete(&self, record: &DatasetRecord, _prompt: &str) -> Result<Completion, ClientError> {
        let start = Instant::now();
        let text = match self {
            MockModel::OptimalEcho => format_plan(&record.plan),
            MockModel::Empty => String::new(),
        };
        Ok(Completion {
            text,
            seconds: start.elapsed().as_secs_f64(),
        })
    }
}
