//! Blocking JSON-over-HTTP plumbing shared by the embedding and chat clients:
//! bearer credentials from the environment, transient-error classification and
//! exponential backoff.

use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

/// Upper bound on configured retries.
pub const MAX_RETRIES_LIMIT: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_backoff_ms: u64,
    pub max_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_backoff_ms: 250,
            max_backoff_ms: 8_000,
        }
    }
}

impl RetryPolicy {
    pub fn backoff(&self, attempt: u32) -> Duration {
        let factor = 1u64 << attempt.min(20);
        Duration::from_millis(
            self.base_backoff_ms
                .saturating_mul(factor)
                .min(self.max_backoff_ms),
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HttpError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("provider rejected request ({status}): {body}")]
    Rejected { status: u16, body: String },
    #[error("malformed provider response: {0}")]
    Protocol(String),
}

enum Failure {
    Transient(String),
    Fatal(HttpError),
}

/// Reads the bearer credential named by `api_key_env`, if one is configured.
pub fn credential(api_key_env: Option<&str>) -> Result<Option<String>, HttpError> {
    match api_key_env {
        None => Ok(None),
        Some(var) => std::env::var(var)
            .map(Some)
            .map_err(|_| HttpError::Auth(format!("environment variable {var} is not set"))),
    }
}

pub fn build_client(timeout: Duration) -> Result<Client, HttpError> {
    Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| HttpError::Transport {
            attempts: 0,
            message: e.to_string(),
        })
}

/// POSTs `body` to `url` and decodes the JSON reply, retrying transient
/// failures (connection errors, timeouts, 429, 5xx). The same bytes are sent
/// on every attempt.
pub fn post_json<R: for<'de> Deserialize<'de>>(
    client: &Client,
    url: &str,
    token: Option<&str>,
    body: &[u8],
    policy: &RetryPolicy,
) -> Result<R, HttpError> {
    let mut attempt = 0u32;
    loop {
        match post_once(client, url, token, body) {
            Ok(bytes) => {
                return serde_json::from_slice(&bytes).map_err(|e| HttpError::Protocol(e.to_string()));
            }
            Err(Failure::Fatal(e)) => return Err(e),
            Err(Failure::Transient(message)) => {
                attempt += 1;
                if attempt > policy.max_retries {
                    warn!(url, attempts = attempt, %message, "giving up");
                    return Err(HttpError::Transport {
                        attempts: attempt,
                        message,
                    });
                }
                let delay = policy.backoff(attempt - 1);
                debug!(url, attempt, ?delay, %message, "retrying");
                std::thread::sleep(delay);
            }
        }
    }
}

fn post_once(client: &Client, url: &str, token: Option<&str>, body: &[u8]) -> Result<Vec<u8>, Failure> {
    let mut request = client
        .post(url)
        .header(reqwest::header::CONTENT_TYPE, "application/json")
        .body(body.to_vec());
    if let Some(token) = token {
        request = request.bearer_auth(token);
    }
    let response = request.send().map_err(|e| Failure::Transient(e.to_string()))?;
    let status = response.status();
    let bytes = response
        .bytes()
        .map_err(|e| Failure::Transient(e.to_string()))?
        .to_vec();
    if status.is_success() {
        return Ok(bytes);
    }
    let text = String::from_utf8_lossy(&bytes).into_owned();
    match status {
        StatusCode::UNAUTHORIZED | StatusCode::FORBIDDEN => {
            Err(Failure::Fatal(HttpError::Auth(format!("{status}: {text}"))))
        }
        StatusCode::TOO_MANY_REQUESTS | StatusCode::REQUEST_TIMEOUT => {
            Err(Failure::Transient(format!("{status}: {text}")))
        }
        s if s.is_server_error() => Err(Failure::Transient(format!("{status}: {text}"))),
        s => Err(Failure::Fatal(HttpError::Rejected {
            status: s.as_u16(),
            body: text,
        })),
    }
}

pub(crate) fn join_url(base: &str, path: &str) -> String {
    format!("{}/{}", base.trim_end_matches('/'), path.trim_start_matches('/'))
}
