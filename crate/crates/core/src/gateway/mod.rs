//! Chat-completion execution with token accounting.
//!
//! A [`Gateway`] wraps one [`ChatBackend`] (the HTTP client or the scripted
//! mock) and owns retry, rate limiting, request construction and usage
//! parsing, so both backends go through identical accounting code.

mod http;
mod mock;

use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::prompt::{message_fingerprint, PromptBundle, TaskKind};

pub use http::HttpBackend;
pub use mock::{
    first_code_block, MatchSpec, MockBackend, MockScript, ScriptEntry, ScriptUsage,
    DEFAULT_MOCK_SECONDS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    #[error("authentication failed (HTTP {status})")]
    Auth { status: u16 },
    #[error("API key variable `{0}` is not set")]
    MissingApiKey(String),
    #[error("declared budget {0} is below one token")]
    BudgetImpossible(u32),
    #[error("gave up after {attempts} attempts: {last}")]
    ExhaustedRetries { attempts: u32, last: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("request rejected: {0}")]
    Rejected(String),
    #[error("sent messages do not match the bundle fingerprint")]
    FingerprintMismatch,
    #[error("invalid backend config: {0}")]
    InvalidConfig(String),
    #[error("mock script: {0}")]
    Script(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Live,
    Mock,
}

impl std::str::FromStr for BackendKind {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(BackendKind::Live),
            "mock" => Ok(BackendKind::Mock),
            other => Err(GatewayError::InvalidConfig(format!(
                "unknown backend `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub mock_script: Option<PathBuf>,
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub base_delay_ms: u64,
    pub requests_per_minute: Option<u32>,
    /// Send a prompt's declared budget as the request's output limit.
    pub hard_output_cap: bool,
    /// Output limit sent when the prompt declares no budget.
    pub default_max_output: Option<u32>,
    pub output_limit_field: String,
    /// Dotted path of the reasoning-token count inside `usage`.
    pub reasoning_field: String,
    /// Message field carrying visible reasoning text, used to estimate
    /// reasoning tokens when the usage report has none.
    pub reasoning_text_field: Option<String>,
    /// Whether the provider's `completion_tokens` already includes
    /// reasoning tokens.
    pub completion_includes_reasoning: bool,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Live,
            mock_script: None,
            base_url: "https://api.deepseek.com/v1".into(),
            model: "deepseek-reasoner".into(),
            api_key_env: "DEEPSEEK_API_KEY".into(),
            timeout_secs: 600.0,
            max_retries: 5,
            base_delay_ms: 1000,
            requests_per_minute: None,
            hard_output_cap: true,
            default_max_output: None,
            output_limit_field: "max_tokens".into(),
            reasoning_field: "completion_tokens_details.reasoning_tokens".into(),
            reasoning_text_field: Some("reasoning_content".into()),
            completion_includes_reasoning: true,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        let bad = |m: &str| Err(GatewayError::InvalidConfig(m.to_string()));
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return bad("timeout_secs must be positive");
        }
        if self.model.trim().is_empty() {
            return bad("model is empty");
        }
        if self.output_limit_field.trim().is_empty() {
            return bad("output_limit_field is empty");
        }
        if self.requests_per_minute == Some(0) {
            return bad("requests_per_minute must be positive");
        }
        if self.kind == BackendKind::Live && self.base_url.trim().is_empty() {
            return bad("base_url is empty");
        }
        Ok(())
    }
}

/// Trial coordinates a backend may use; the mock selects responses by them.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RequestMeta {
    pub sample_id: String,
    pub task: Option<TaskKind>,
    pub tags: Vec<String>,
    /// Strategy row label, e.g. `Comb1`.
    pub label: String,
    /// Which artifact the prompt was built from, e.g. `orig` or `rf`.
    pub variant: String,
    /// Deterministic position of the trial in the experiment plan.
    pub ordinal: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawResponse {
    pub body: Value,
    /// Simulated latency; `None` means measure real elapsed time.
    pub simulated_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttemptError {
    /// 429, 5xx or timeout.
    Transient(String),
    Auth(u16),
    Fatal(GatewayError),
}

pub trait ChatBackend: Send + Sync {
    fn id(&self) -> String;

    /// True if the backend never touches the network; retries then skip
    /// sleeping.
    fn is_simulated(&self) -> bool {
        false
    }

    fn send(
        &self,
        body: &Value,
        config: &BackendConfig,
        meta: &RequestMeta,
    ) -> Result<RawResponse, AttemptError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceRecord {
    pub prompt_tokens: u64,
    pub reasoning_tokens: u64,
    pub completion_tokens: u64,
    pub total_tokens: u64,
    pub wall_seconds: f64,
    pub output_text: String,
    pub backend: String,
    pub fingerprint: String,
    pub estimated: bool,
    pub attempts: u32,
}

impl InferenceRecord {
    pub fn accounting_holds(&self) -> bool {
        self.total_tokens == self.prompt_tokens + self.reasoning_tokens + self.completion_tokens
    }
}

/// Heuristic token count: each maximal run of word characters (letters,
/// digits, `_`) is one token and every other non-whitespace character is one
/// token.
pub fn estimate_tokens(text: &str) -> u64 {
    let mut count = 0;
    let mut in_word = false;
    for c in text.chars() {
        if c.is_alphanumeric() || c == '_' {
            if !in_word {
                count += 1;
                in_word = true;
            }
        } else {
            in_word = false;
            if !c.is_whitespace() {
                count += 1;
            }
        }
    }
    count
}

/// Admission control shared by all workers of one gateway.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Option<Duration>,
    next: Mutex<Instant>,
}

impl RateLimiter {
    pub fn new(requests_per_minute: Option<u32>) -> Self {
        Self {
            interval: requests_per_minute.map(|r| Duration::from_secs_f64(60.0 / r as f64)),
            next: Mutex::new(Instant::now()),
        }
    }

    /// Block until this caller may send. Returns the time waited.
    pub fn admit(&self) -> Duration {
        let Some(interval) = self.interval else {
            return Duration::ZERO;
        };
        let wait = {
            let mut next = self.next.lock().expect("limiter lock");
            let now = Instant::now();
            let slot = (*next).max(now);
            *next = slot + interval;
            slot - now
        };
        if !wait.is_zero() {
            thread::sleep(wait);
        }
        wait
    }
}

pub struct Gateway {
    backend: Arc<dyn ChatBackend>,
    config: BackendConfig,
    limiter: RateLimiter,
}

impl Gateway {
    pub fn new(backend: Arc<dyn ChatBackend>, config: BackendConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        let limiter = RateLimiter::new(config.requests_per_minute);
        Ok(Self {
            backend,
            config,
            limiter,
        })
    }

    /// Build the backend named by `config.kind`.
    pub fn from_config(config: BackendConfig) -> Result<Self, GatewayError> {
        let backend: Arc<dyn ChatBackend> = match config.kind {
            BackendKind::Live => Arc::new(HttpBackend::new(&config)?),
            BackendKind::Mock => {
                let path = config.mock_script.as_ref().ok_or_else(|| {
                    GatewayError::InvalidConfig("mock backend needs a script".into())
                })?;
                Arc::new(MockBackend::new(MockScript::load(path)?))
            }
        };
        Self::new(backend, config)
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    pub fn backend_id(&self) -> String {
        self.backend.id()
    }

    /// Request body for `bundle`, exactly as it goes on the wire.
    pub fn request_body(&self, bundle: &PromptBundle) -> Result<Value, GatewayError> {
        let mut body = json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": bundle.system_text},
                {"role": "user", "content": bundle.user_text},
            ],
        });
        let limit = match bundle.declared_budget {
            Some(b) if b < 1 => return Err(GatewayError::BudgetImpossible(b)),
            Some(b) if self.config.hard_output_cap => Some(b),
            _ => self.config.default_max_output,
        };
        if let Some(limit) = limit {
            body[self.config.output_limit_field.as_str()] = json!(limit);
        }
        Ok(body)
    }

    /// Send `bundle` once, retrying transient failures with exponential
    /// backoff.
    pub fn complete(
        &self,
        bundle: &PromptBundle,
        meta: &RequestMeta,
    ) -> Result<InferenceRecord, GatewayError> {
        let body = self.request_body(bundle)?;
        let fingerprint = bundle.fingerprint();
        if sent_fingerprint(&body).as_deref() != Some(fingerprint.as_str()) {
            return Err(GatewayError::FingerprintMismatch);
        }
        let mut attempts = 0;
        loop {
            attempts += 1;
            self.limiter.admit();
            let started = Instant::now();
            let outcome = self.backend.send(&body, &self.config, meta);
            let elapsed = started.elapsed().as_secs_f64();
            match outcome {
                Ok(raw) => {
                    let wall = raw
                        .simulated_seconds
                        .unwrap_or(elapsed)
                        .max(f64::MIN_POSITIVE);
                    let mut record = parse_response(&raw.body, &self.config, bundle)?;
                    record.wall_seconds = wall;
                    record.backend = self.backend.id();
                    record.fingerprint = fingerprint;
                    record.attempts = attempts;
                    return Ok(record);
                }
                Err(AttemptError::Auth(status)) => return Err(GatewayError::Auth { status }),
                Err(AttemptError::Fatal(e)) => return Err(e),
                Err(AttemptError::Transient(reason)) => {
                    if attempts > self.config.max_retries {
                        return Err(GatewayError::ExhaustedRetries {
                            attempts,
                            last: reason,
                        });
                    }
                    log::warn!("attempt {attempts} failed ({reason}); retrying");
                    if !self.backend.is_simulated() {
                        thread::sleep(backoff_delay(self.config.base_delay_ms, attempts));
                    }
                }
            }
        }
    }
}

/// Delay before retry number `attempt` (1-based): `base * 2^(attempt-1)`,
/// capped at one minute.
pub fn backoff_delay(base_ms: u64, attempt: u32) -> Duration {
    let factor = 1u64 << (attempt.saturating_sub(1)).min(16);
    Duration::from_millis(base_ms.saturating_mul(factor).min(60_000))
}

/// Fingerprint of the messages inside a request body.
pub fn sent_fingerprint(body: &Value) -> Option<String> {
    let messages = body.get("messages")?.as_array()?;
    let content = |role: &str| {
        messages
            .iter()
            .find(|m| m.get("role").and_then(Value::as_str) == Some(role))
            .and_then(|m| m.get("content"))
            .and_then(Value::as_str)
    };
    Some(message_fingerprint(content("system")?, content("user")?))
}

fn lookup<'a>(value: &'a Value, dotted: &str) -> Option<&'a Value> {
    dotted.split('.').try_fold(value, |v, key| v.get(key))
}

fn parse_response(
    body: &Value,
    config: &BackendConfig,
    bundle: &PromptBundle,
) -> Result<InferenceRecord, GatewayError> {
    let message = body
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("message"))
        .ok_or_else(|| GatewayError::MalformedResponse("no choices[0].message".into()))?;
    let output_text = message
        .get("content")
        .and_then(Value::as_str)
        .unwrap_or("")
        .to_string();
    let reasoning_text = config
        .reasoning_text_field
        .as_deref()
        .and_then(|f| message.get(f))
        .and_then(Value::as_str);

    let usage = body.get("usage");
    let field = |name: &str| usage.and_then(|u| lookup(u, name)).and_then(Value::as_u64);
    let prompt = field("prompt_tokens");
    let completion = field("completion_tokens");
    let reported_reasoning = field(&config.reasoning_field);

    let mut estimated = false;
    let prompt_tokens = prompt.unwrap_or_else(|| {
        estimated = true;
        estimate_tokens(&bundle.system_text) + estimate_tokens(&bundle.user_text)
    });
    let reasoning_tokens = match reported_reasoning {
        Some(r) => r,
        None => match reasoning_text {
            Some(text) if !text.is_empty() => {
                estimated = true;
                estimate_tokens(text)
            }
            _ => 0,
        },
    };
    let completion_tokens = match completion {
        Some(c) if config.completion_includes_reasoning => c.saturating_sub(reasoning_tokens),
        Some(c) => c,
        None => {
            estimated = true;
            estimate_tokens(&output_text)
        }
    };
    if usage.is_none() {
        log::warn!("response has no usage report; token counts estimated");
    }
    Ok(InferenceRecord {
        prompt_tokens,
        reasoning_tokens,
        completion_tokens,
        total_tokens: prompt_tokens + reasoning_tokens + completion_tokens,
        wall_seconds: 0.0,
        output_text,
        backend: String::new(),
        fingerprint: String::new(),
        estimated,
        attempts: 0,
    })
}
