use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::{validate_texts, EmbedError, Embedder};
use crate::geometry::EmbeddingVector;

const MOCK_DOMAIN: &[u8] = b"linloop/mock-embed/v1";

/// Unit vector drawn from a ChaCha20 stream keyed by `SHA-256(seed_material)`.
///
/// Components are uniform on `[-1, 1)` built from the top 53 bits of each
/// 64-bit draw, then divided by the Euclidean norm. Only correctly rounded
/// IEEE operations are involved, so output is bit-identical on every platform.
pub fn seeded_unit_vector(seed_material: &[u8], dim: usize) -> EmbeddingVector {
    assert!(dim >= 2, "embedding dimension must be at least 2");
    let key: [u8; 32] = Sha256::digest(seed_material).into();
    let mut rng = ChaCha20Rng::from_seed(key);
    loop {
        let components: Vec<f64> = (0..dim)
            .map(|_| {
                let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                2.0 * unit - 1.0
            })
            .collect();
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        // All-zero draws are astronomically unlikely but would not normalize.
        if norm > 0.0 {
            let unit = components.into_iter().map(|c| c / norm).collect();
            return EmbeddingVector::new(unit).expect("finite components of dimension >= 2");
        }
    }
}

/// Deterministic stand-in for a text embedding model.
pub fn mock_embed(text: &str, dim: usize, seed: u64) -> EmbeddingVector {
    let mut material = Vec::with_capacity(MOCK_DOMAIN.len() + 9 + text.len());
    material.extend_from_slice(MOCK_DOMAIN);
    material.push(0);
    material.extend_from_slice(&seed.to_le_bytes());
    material.extend_from_slice(text.as_bytes());
    seeded_unit_vector(&material, dim)
}

/// [`Embedder`] backed by [`mock_embed`].
#[derive(Debug, Clone)]
pub struct MockEmbedder {
    dim: usize,
    seed: u64,
    model: String,
}

impl MockEmbedder {
    pub fn new(dim: usize, seed: u64) -> Result<Self, EmbedError> {
        if dim < 2 {
            return Err(EmbedError::Config(format!(
                "mock embedder dimension must be at least 2, got {dim}"
            )));
        }
        Ok(Self {
            dim,
            seed,
            model: format!("mock-embed-v1/seed-{seed}"),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Embedder for MockEmbedder {
    fn model(&self) -> &str {
        &self.model
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        validate_texts(texts)?;
        Ok(texts.iter().map(|t| mock_embed(t, self.dim, self.seed)).collect())
    }
}
