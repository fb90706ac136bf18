//! Content-addressed embedding cache: one JSON record per `(model, text)`
//! under `ab/cd/<hash>.json`, written atomically via temp file and rename.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tracing::warn;

use super::{validate_texts, EmbedError, Embedder};
use crate::geometry::EmbeddingVector;

/// Narrowest float width that represents every component exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    F64,
}

impl Precision {
    pub fn of(components: &[f64]) -> Self {
        if components.iter().all(|&c| (c as f32) as f64 == c) {
            Precision::F32
        } else {
            Precision::F64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub text_hash: String,
    pub model: String,
    pub vector: EmbeddingVector,
    pub created_at: String,
    pub source_precision: Precision,
    pub checksum: String,
}

impl EmbeddingRecord {
    pub fn new(model: &str, text: &str, vector: EmbeddingVector) -> Self {
        let mut record = Self {
            text_hash: cache_key(model, text),
            model: model.to_string(),
            source_precision: Precision::of(vector.as_slice()),
            vector,
            created_at: chrono::Utc::now().to_rfc3339(),
            checksum: String::new(),
        };
        record.checksum = record.compute_checksum();
        record
    }

    pub fn compute_checksum(&self) -> String {
        let mut h = Sha256::new();
        for field in [&self.text_hash, &self.model, &self.created_at] {
            h.update((field.len() as u64).to_le_bytes());
            h.update(field.as_bytes());
        }
        h.update([self.source_precision as u8]);
        for c in self.vector.as_slice() {
            h.update(c.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn is_intact(&self) -> bool {
        self.checksum == self.compute_checksum()
    }
}

/// Hex SHA-256 of the length-prefixed model name followed by the text.
pub fn cache_key(model: &str, text: &str) -> String {
    let mut h = Sha256::new();
    h.update((model.len() as u64).to_le_bytes());
    h.update(model.as_bytes());
    h.update(text.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    pub corrupt: usize,
}

enum Lookup {
    Hit(EmbeddingVector),
    Miss,
    Corrupt(String),
}

/// Memoizes any [`Embedder`] on disk.
pub struct CachedEmbedder<E> {
    inner: E,
    dir: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
    corrupt: AtomicUsize,
}

impl<E: Embedder> CachedEmbedder<E> {
    pub fn new(inner: E, dir: impl Into<PathBuf>) -> Result<Self, EmbedError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)
            .map_err(|e| EmbedError::Cache(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            inner,
            dir,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
            corrupt: AtomicUsize::new(0),
        })
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            corrupt: self.corrupt.load(Ordering::Relaxed),
        }
    }

    pub fn record_path(&self, text: &str) -> PathBuf {
        let key = cache_key(self.inner.model(), text);
        self.dir
            .join(&key[0..2])
            .join(&key[2..4])
            .join(format!("{key}.json"))
    }

    fn lookup(&self, text: &str) -> Lookup {
        let path = self.record_path(text);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Lookup::Miss,
            Err(e) => return Lookup::Corrupt(e.to_string()),
        };
        let record: EmbeddingRecord = match serde_json::from_slice(&bytes) {
            Ok(r) => r,
            Err(e) => return Lookup::Corrupt(format!("unparseable record: {e}")),
        };
        if !record.is_intact() {
            return Lookup::Corrupt("checksum mismatch".into());
        }
        if record.model != self.inner.model() || record.text_hash != cache_key(self.inner.model(), text) {
            return Lookup::Corrupt("record belongs to another key".into());
        }
        if record.vector.dim() != self.inner.dim() {
            return Lookup::Corrupt(format!(
                "stored dimension {} differs from expected {}",
                record.vector.dim(),
                self.inner.dim()
            ));
        }
        Lookup::Hit(record.vector)
    }

    fn store(&self, text: &str, vector: &EmbeddingVector) -> Result<(), EmbedError> {
        let path = self.record_path(text);
        let parent = path.parent().expect("record path has a parent");
        let io = |e: std::io::Error| EmbedError::Cache(format!("{}: {e}", path.display()));
        std::fs::create_dir_all(parent).map_err(io)?;
        let record = EmbeddingRecord::new(self.inner.model(), text, vector.clone());
        let bytes = serde_json::to_vec(&record).map_err(|e| EmbedError::Cache(e.to_string()))?;
        let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(io)?;
        tmp.write_all(&bytes).map_err(io)?;
        tmp.persist(&path).map_err(|e| io(e.error))?;
        Ok(())
    }
}

impl<E: Embedder> Embedder for CachedEmbedder<E> {
    fn model(&self) -> &str {
        self.inner.model()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        validate_texts(texts)?;
        let mut out: Vec<Option<EmbeddingVector>> = Vec::with_capacity(texts.len());
        let mut missing: Vec<usize> = Vec::new();
        for (i, text) in texts.iter().enumerate() {
            match self.lookup(text) {
                Lookup::Hit(v) => {
                    self.hits.fetch_add(1, Ordering::Relaxed);
                    out.push(Some(v));
                }
                Lookup::Miss => {
                    self.misses.fetch_add(1, Ordering::Relaxed);
                    out.push(None);
                    missing.push(i);
                }
                Lookup::Corrupt(reason) => {
                    warn!(path = %self.record_path(text).display(), %reason, "corrupt cache record, refetching");
                    self.corrupt.fetch_add(1, Ordering::Relaxed);
                    self.misses.fetch_add(1, Ordering::Relaxed);
                    out.push(None);
                    missing.push(i);
                }
            }
        }

        if !missing.is_empty() {
            // Duplicate texts within one batch are fetched once.
            let mut unique: Vec<String> = missing.iter().map(|&i| texts[i].clone()).collect();
            unique.sort();
            unique.dedup();
            let fetched = self.inner.embed_batch(&unique)?;
            if fetched.len() != unique.len() {
                return Err(EmbedError::Provider(format!(
                    "embedder returned {} vectors for {} texts",
                    fetched.len(),
                    unique.len()
                )));
            }
            for (text, vector) in unique.iter().zip(&fetched) {
                self.store(text, vector)?;
            }
            for &i in &missing {
                let pos = unique.binary_search(&texts[i]).expect("text was fetched");
                out[i] = Some(fetched[pos].clone());
            }
        }
        Ok(out.into_iter().map(|v| v.expect("every slot filled")).collect())
    }
}

/// Embeds `texts` through an on-disk cache rooted at `cache_dir`.
pub fn cached_embed<E: Embedder>(
    texts: &[String],
    embedder: &E,
    cache_dir: impl Into<PathBuf>,
) -> Result<Vec<EmbeddingVector>, EmbedError> {
    CachedEmbedder::new(embedder, cache_dir)?.embed_batch(texts)
}
