//! Turning texts into embedding vectors: the [`Embedder`] abstraction, a
//! deterministic offline mock, an HTTP client for embeddings endpoints, an
//! on-disk cache, and the trajectory file format.

mod cache;
mod client;
mod mock;
mod trajectory_file;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::EmbeddingVector;
use crate::http::HttpError;

pub use cache::{cache_key, cached_embed, CacheStats, CachedEmbedder, EmbeddingRecord, Precision};
pub use client::{HttpEmbedder, ProviderConfig};
pub use mock::{mock_embed, seeded_unit_vector, MockEmbedder};
pub use trajectory_file::{
    read_trajectory, read_trajectory_from, write_trajectory, write_trajectory_to, TrajectoryFileError,
    TRAJECTORY_FORMAT_VERSION,
};

/// Identifies the embedding model a vector came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedderFingerprint {
    pub model: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbedError {
    #[error("nothing to embed")]
    EmptyInput,
    #[error("text #{index} is empty")]
    EmptyText { index: usize },
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("provider error: {0}")]
    Provider(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error("invalid provider config: {0}")]
    Config(String),
}

impl From<HttpError> for EmbedError {
    fn from(e: HttpError) -> Self {
        match e {
            HttpError::Auth(m) => EmbedError::Auth(m),
            e @ HttpError::Transport { .. } => EmbedError::Transport(e.to_string()),
            e => EmbedError::Provider(e.to_string()),
        }
    }
}

/// Maps texts to vectors of one fixed dimension, preserving order.
pub trait Embedder: Send + Sync {
    fn model(&self) -> &str;

    fn dim(&self) -> usize;

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError>;

    fn fingerprint(&self) -> EmbedderFingerprint {
        EmbedderFingerprint {
            model: self.model().to_string(),
            dim: self.dim(),
        }
    }
}

impl<E: Embedder + ?Sized> Embedder for &E {
    fn model(&self) -> &str {
        (**self).model()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        (**self).embed_batch(texts)
    }
}

impl<E: Embedder + ?Sized> Embedder for Box<E> {
    fn model(&self) -> &str {
        (**self).model()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        (**self).embed_batch(texts)
    }
}

impl<E: Embedder + ?Sized> Embedder for Arc<E> {
    fn model(&self) -> &str {
        (**self).model()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        (**self).embed_batch(texts)
    }
}

pub(crate) fn validate_texts(texts: &[String]) -> Result<(), EmbedError> {
    if texts.is_empty() {
        return Err(EmbedError::EmptyInput);
    }
    if let Some(index) = texts.iter().position(|t| t.is_empty()) {
        return Err(EmbedError::EmptyText { index });
    }
    Ok(())
}
