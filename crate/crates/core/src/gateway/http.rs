//! Blocking HTTPS client for OpenAI-compatible chat-completion endpoints.

use std::env;
use std::time::Duration;

use serde_json::Value;

use super::{AttemptError, BackendConfig, ChatBackend, GatewayError, RawResponse, RequestMeta};

pub struct HttpBackend {
    client: reqwest::blocking::Client,
    url: String,
    api_key: String,
    model: String,
}

impl HttpBackend {
    /// Resolve the API key and build the client.
    pub fn new(config: &BackendConfig) -> Result<Self, GatewayError> {
        let api_key = env::var(&config.api_key_env)
            .map_err(|_| GatewayError::MissingApiKey(config.api_key_env.clone()))?;
        Self::with_key(config, api_key)
    }

    pub fn with_key(
        config: &BackendConfig,
        api_key: impl Into<String>,
    ) -> Result<Self, GatewayError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| GatewayError::InvalidConfig(e.to_string()))?;
        Ok(Self {
            client,
            url: format!("{}/chat/completions", config.base_url.trim_end_matches('/')),
            api_key: api_key.into(),
            model: config.model.clone(),
        })
    }
}

impl ChatBackend for HttpBackend {
    fn id(&self) -> String {
        format!("live:{}", self.model)
    }

    fn send(
        &self,
        body: &Value,
        _config: &BackendConfig,
        _meta: &RequestMeta,
    ) -> Result<RawResponse, AttemptError> {
        let response = self
            .client
            .post(&self.url)
            .bearer_auth(&self.api_key)
            .json(body)
            .send()
            .map_err(|e| {
                if e.is_timeout() || e.is_connect() {
                    AttemptError::Transient(e.to_string())
                } else {
                    AttemptError::Fatal(GatewayError::Rejected(e.to_string()))
                }
            })?;
        let status = response.status().as_u16();
        let text = response
            .text()
            .map_err(|e| AttemptError::Transient(format!("reading body: {e}")))?;
        match status {
            200..=299 => {}
            401 | 403 => return Err(AttemptError::Auth(status)),
            429 | 500..=599 => return Err(AttemptError::Transient(format!("HTTP {status}"))),
            _ => {
                let snippet: String = text.chars().take(200).collect();
                return Err(AttemptError::Fatal(GatewayError::Rejected(format!(
                    "HTTP {status}: {snippet}"
                ))));
            }
        }
        let body = serde_json::from_str(&text)
            .map_err(|e| AttemptError::Fatal(GatewayError::MalformedResponse(e.to_string())))?;
        Ok(RawResponse {
            body,
            simulated_seconds: None,
        })
    }
}
