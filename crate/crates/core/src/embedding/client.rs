use std::time::Duration;

use rayon::prelude::*;
use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};

use super::{validate_texts, EmbedError, Embedder};
use crate::geometry::EmbeddingVector;
use crate::http::{self, RetryPolicy, MAX_RETRIES_LIMIT};

fn default_timeout_secs() -> u64 {
    30
}
fn default_max_retries() -> u32 {
    3
}
fn default_parallelism() -> usize {
    1
}
fn default_max_batch_size() -> usize {
    64
}
fn default_base_backoff_ms() -> u64 {
    250
}

/// Connection settings for an embeddings endpoint. The credential itself is
/// never stored, only the name of the environment variable holding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub base_url: String,
    pub model: String,
    pub expected_dim: usize,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_max_batch_size")]
    pub max_batch_size: usize,
    #[serde(default = "default_base_backoff_ms")]
    pub base_backoff_ms: u64,
}

impl ProviderConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>, expected_dim: usize) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            expected_dim,
            timeout_secs: default_timeout_secs(),
            max_retries: default_max_retries(),
            parallelism: default_parallelism(),
            api_key_env: None,
            max_batch_size: default_max_batch_size(),
            base_backoff_ms: default_base_backoff_ms(),
        }
    }

    pub fn validate(&self) -> Result<(), EmbedError> {
        let fail = |m: String| Err(EmbedError::Config(m));
        if reqwest::Url::parse(&self.base_url).is_err() {
            return fail(format!("base_url {:?} is not a valid URL", self.base_url));
        }
        if self.model.is_empty() {
            return fail("model must not be empty".into());
        }
        if self.expected_dim < 2 {
            return fail(format!(
                "expected_dim must be at least 2, got {}",
                self.expected_dim
            ));
        }
        if self.max_retries > MAX_RETRIES_LIMIT {
            return fail(format!(
                "max_retries must be at most {MAX_RETRIES_LIMIT}, got {}",
                self.max_retries
            ));
        }
        if self.parallelism == 0 || self.max_batch_size == 0 {
            return fail("parallelism and max_batch_size must be positive".into());
        }
        Ok(())
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.max_retries,
            base_backoff_ms: self.base_backoff_ms,
            ..RetryPolicy::default()
        }
    }
}

#[derive(Serialize)]
struct EmbeddingsRequest<'a> {
    model: &'a str,
    input: &'a [String],
}

#[derive(Deserialize)]
struct EmbeddingsResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    index: usize,
    embedding: Vec<f64>,
}

/// Client for `POST {base_url}/embeddings`.
pub struct HttpEmbedder {
    config: ProviderConfig,
    client: Client,
    pool: rayon::ThreadPool,
}

impl HttpEmbedder {
    pub fn new(config: ProviderConfig) -> Result<Self, EmbedError> {
        config.validate()?;
        let client = http::build_client(Duration::from_secs(config.timeout_secs))?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallelism)
            .build()
            .map_err(|e| EmbedError::Config(e.to_string()))?;
        Ok(Self { config, client, pool })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    fn embed_chunk(&self, texts: &[String], token: Option<&str>) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let body = serde_json::to_vec(&EmbeddingsRequest {
            model: &self.config.model,
            input: texts,
        })
        .map_err(|e| EmbedError::Provider(e.to_string()))?;
        let url = http::join_url(&self.config.base_url, "embeddings");
        let response: EmbeddingsResponse =
            http::post_json(&self.client, &url, token, &body, &self.config.retry_policy())?;

        if response.data.len() != texts.len() {
            return Err(EmbedError::Provider(format!(
                "asked for {} embeddings, received {}",
                texts.len(),
                response.data.len()
            )));
        }
        let mut slots: Vec<Option<EmbeddingVector>> = vec![None; texts.len()];
        for datum in response.data {
            if datum.embedding.len() != self.config.expected_dim {
                return Err(EmbedError::DimensionMismatch {
                    expected: self.config.expected_dim,
                    got: datum.embedding.len(),
                });
            }
            let slot = slots.get_mut(datum.index).ok_or_else(|| {
                EmbedError::Provider(format!("response index {} out of range", datum.index))
            })?;
            if slot.is_some() {
                return Err(EmbedError::Provider(format!(
                    "duplicate response index {}",
                    datum.index
                )));
            }
            let vector = EmbeddingVector::new(datum.embedding)
                .map_err(|e| EmbedError::Provider(format!("bad vector: {e}")))?;
            *slot = Some(vector);
        }
        Ok(slots
            .into_iter()
            .map(|s| s.expect("every index filled exactly once"))
            .collect())
    }
}

impl Embedder for HttpEmbedder {
    fn model(&self) -> &str {
        &self.config.model
    }

    fn dim(&self) -> usize {
        self.config.expected_dim
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        validate_texts(texts)?;
        let token = http::credential(self.config.api_key_env.as_deref())?;
        let chunks: Vec<&[String]> = texts.chunks(self.config.max_batch_size).collect();
        let results: Vec<Result<Vec<EmbeddingVector>, EmbedError>> = self.pool.install(|| {
            chunks
                .par_iter()
                .map(|chunk| self.embed_chunk(chunk, token.as_deref()))
                .collect()
        });
        let mut out = Vec::with_capacity(texts.len());
        for r in results {
            out.extend(r?);
        }
        Ok(out)
    }
}
