use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::{ChatBackend, ChatRequest, ChatResponse, GatewayError, TokenCounts};

pub const ENV_API_BASE: &str = "HEURTREE_API_BASE";
pub const ENV_API_KEY: &str = "HEURTREE_API_KEY";
pub const ENV_MODEL: &str = "HEURTREE_MODEL";

const DEFAULT_API_BASE: &str = "https://api.openai.com/v1";
const DEFAULT_MODEL: &str = "gpt-4o-mini";

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    /// Base URL up to and including the version segment, e.g. `https://host/v1`.
    pub base_url: String,
    pub api_key: Option<String>,
    pub model: String,
    pub request_timeout: Duration,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self {
            base_url: DEFAULT_API_BASE.to_string(),
            api_key: None,
            model: DEFAULT_MODEL.to_string(),
            request_timeout: Duration::from_secs(120),
        }
    }
}

impl HttpConfig {
    /// Overrides the defaults with `HEURTREE_API_BASE`, `HEURTREE_API_KEY` and
    /// `HEURTREE_MODEL` when they are set.
    pub fn from_env() -> Self {
        let mut config = Self::default();
        config.apply_env(|key| std::env::var(key).ok());
        config
    }

    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        if let Some(base) = lookup(ENV_API_BASE).filter(|s| !s.is_empty()) {
            self.base_url = base;
        }
        if let Some(key) = lookup(ENV_API_KEY).filter(|s| !s.is_empty()) {
            self.api_key = Some(key);
        }
        if let Some(model) = lookup(ENV_MODEL).filter(|s| !s.is_empty()) {
            self.model = model;
        }
    }

    pub fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

/// OpenAI-compatible chat-completions client.
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    config: HttpConfig,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend")
            .field("endpoint", &self.config.endpoint())
            .field("model", &self.config.model)
            .field("has_api_key", &self.config.api_key.is_some())
            .finish()
    }
}

#[derive(Deserialize)]
struct CompletionBody {
    choices: Vec<Choice>,
    usage: Option<UsageBody>,
}

#[derive(Deserialize)]
struct Choice {
    message: MessageBody,
}

#[derive(Deserialize)]
struct MessageBody {
    content: Option<String>,
}

#[derive(Deserialize)]
struct UsageBody {
    prompt_tokens: u64,
    completion_tokens: u64,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.request_timeout)
            .build()
            .map_err(|e| GatewayError::Transport(format!("failed to build client: {e}")))?;
        Ok(Self { client, config })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }
}

pub(crate) fn parse_completion(body: &str) -> Result<(String, Option<TokenCounts>), GatewayError> {
    let parsed: CompletionBody =
        serde_json::from_str(body).map_err(|e| GatewayError::MalformedBody(e.to_string()))?;
    let text = parsed
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| GatewayError::MalformedBody("no choice with message content".into()))?;
    let tokens = parsed.usage.map(|u| TokenCounts {
        input: u.prompt_tokens,
        output: u.completion_tokens,
    });
    Ok((text, tokens))
}

impl ChatBackend for HttpBackend {
    fn complete(&mut self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let started = Instant::now();
        let mut builder = self.client.post(self.config.endpoint()).json(request);
        if let Some(key) = &self.config.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder
            .send()
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        let status = response.status();
        let body = response
            .text()
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(GatewayError::Status {
                status: status.as_u16(),
                body,
            });
        }
        let (text, token_counts) = parse_completion(&body)?;
        Ok(ChatResponse {
            text,
            token_counts,
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }
}
