use std::time::Duration;

use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};

use super::{TransformError, Transformer};
use crate::http::{self, RetryPolicy, MAX_RETRIES_LIMIT};

fn default_timeout_secs() -> u64 {
    60
}
fn default_max_retries() -> u32 {
    3
}
fn default_base_backoff_ms() -> u64 {
    250
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChatConfig {
    pub base_url: String,
    pub model: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_base_backoff_ms")]
    pub base_backoff_ms: u64,
}

impl ChatConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            timeout_secs: default_timeout_secs(),
            max_retries: default_max_retries(),
            api_key_env: None,
            base_backoff_ms: default_base_backoff_ms(),
        }
    }

    pub fn validate(&self) -> Result<(), TransformError> {
        if reqwest::Url::parse(&self.base_url).is_err() {
            return Err(TransformError::InvalidStep(format!(
                "base_url {:?} is not a valid URL",
                self.base_url
            )));
        }
        if self.max_retries > MAX_RETRIES_LIMIT {
            return Err(TransformError::InvalidStep(format!(
                "max_retries must be at most {MAX_RETRIES_LIMIT}"
            )));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    temperature: f64,
    messages: [ChatMessage<'a>; 2],
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

/// Client for `POST {base_url}/chat/completions`: the instruction goes in
/// the system message, the text in the user message, temperature 0.
pub struct ChatTransformer {
    config: ChatConfig,
    client: Client,
}

impl ChatTransformer {
    pub fn new(config: ChatConfig) -> Result<Self, TransformError> {
        config.validate()?;
        let client = http::build_client(Duration::from_secs(config.timeout_secs))?;
        Ok(Self { config, client })
    }
}

impl Transformer for ChatTransformer {
    fn fingerprint(&self) -> String {
        format!("chat:{}", self.config.model)
    }

    fn transform(&self, instruction: &str, text: &str) -> Result<String, TransformError> {
        let token = http::credential(self.config.api_key_env.as_deref())?;
        let body = serde_json::to_vec(&ChatRequest {
            model: &self.config.model,
            temperature: 0.0,
            messages: [
                ChatMessage {
                    role: "system",
                    content: instruction,
                },
                ChatMessage {
                    role: "user",
                    content: text,
                },
            ],
        })
        .map_err(|e| TransformError::Provider(e.to_string()))?;
        let policy = RetryPolicy {
            max_retries: self.config.max_retries,
            base_backoff_ms: self.config.base_backoff_ms,
            ..RetryPolicy::default()
        };
        let url = http::join_url(&self.config.base_url, "chat/completions");
        let response: ChatResponse = http::post_json(&self.client, &url, token.as_deref(), &body, &policy)?;
        let content = response
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default();
        if content.is_empty() {
            return Err(TransformError::EmptyOutput);
        }
        Ok(content)
    }
}

/// Offline stand-in for a chat provider: returns the text unchanged.
#[derive(Debug, Default, Clone, Copy)]
pub struct EchoTransformer;

impl Transformer for EchoTransformer {
    fn fingerprint(&self) -> String {
        "echo".into()
    }

    fn transform(&self, _instruction: &str, text: &str) -> Result<String, TransformError> {
        Ok(text.to_string())
    }
}
