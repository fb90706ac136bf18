use thiserror::Error;

use crate::embedding::EmbedderFingerprint;
use crate::geometry::EmbeddingVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("{texts} texts but {vectors} vectors")]
    LengthMismatch { texts: usize, vectors: usize },
    #[error("a trajectory needs at least 2 entries, got {0}")]
    TooShort(usize),
    #[error("vector #{index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
}

/// An element `λ` together with its successive reformulations
/// `λ, U₁(λ), (U₂∘U₁)(λ), …` and their embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    element_id: String,
    texts: Vec<String>,
    vectors: Vec<EmbeddingVector>,
    sequence_ref: String,
    embedder: EmbedderFingerprint,
}

impl Trajectory {
    pub fn new(
        element_id: impl Into<String>,
        texts: Vec<String>,
        vectors: Vec<EmbeddingVector>,
        sequence_ref: impl Into<String>,
        embedder: EmbedderFingerprint,
    ) -> Result<Self, TrajectoryError> {
        if texts.len() != vectors.len() {
            return Err(TrajectoryError::LengthMismatch {
                texts: texts.len(),
                vectors: vectors.len(),
            });
        }
        if texts.len() < 2 {
            return Err(TrajectoryError::TooShort(texts.len()));
        }
        for (index, v) in vectors.iter().enumerate() {
            if v.dim() != embedder.dim {
                return Err(TrajectoryError::DimensionMismatch {
                    index,
                    expected: embedder.dim,
                    got: v.dim(),
                });
            }
        }
        Ok(Self {
            element_id: element_id.into(),
            texts,
            vectors,
            sequence_ref: sequence_ref.into(),
            embedder,
        })
    }

    pub fn element_id(&self) -> &str {
        &self.element_id
    }

    /// The original element `λ`.
    pub fn element(&self) -> &str {
        &self.texts[0]
    }

    pub fn texts(&self) -> &[String] {
        &self.texts
    }

    pub fn vectors(&self) -> &[EmbeddingVector] {
        &self.vectors
    }

    pub fn sequence_ref(&self) -> &str {
        &self.sequence_ref
    }

    pub fn embedder(&self) -> &EmbedderFingerprint {
        &self.embedder
    }

    pub fn dim(&self) -> usize {
        self.embedder.dim
    }

    /// Number of transformation steps `L`.
    pub fn steps(&self) -> usize {
        self.texts.len() - 1
    }

    pub fn first_vector(&self) -> &EmbeddingVector {
        &self.vectors[0]
    }

    pub fn last_vector(&self) -> &EmbeddingVector {
        &self.vectors[self.vectors.len() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(dim: usize) -> EmbedderFingerprint {
        EmbedderFingerprint {
            model: "m".into(),
            dim,
        }
    }

    #[test]
    fn invariants_are_enforced() {
        let v = EmbeddingVector::new(vec![1.0, 0.0]).unwrap();
        let w = EmbeddingVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            Trajectory::new("e", vec!["a".into()], vec![v.clone()], "s", fp(2)),
            Err(TrajectoryError::TooShort(1))
        );
        assert!(matches!(
            Trajectory::new("e", vec!["a".into(), "b".into()], vec![v.clone()], "s", fp(2)),
            Err(TrajectoryError::LengthMismatch { .. })
        ));
        assert!(matches!(
            Trajectory::new("e", vec!["a".into(), "b".into()], vec![v.clone(), w], "s", fp(2)),
            Err(TrajectoryError::DimensionMismatch { index: 1, .. })
        ));
        let t = Trajectory::new("e", vec!["a".into(), "b".into()], vec![v.clone(), v], "s", fp(2)).unwrap();
        assert_eq!(t.steps(), 1);
        assert_eq!(t.element(), "a");
    }
}
