use serde::{Deserialize, Serialize};

use super::GeometryError;

/// A point in embedding space with a fixed dimension of at least 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(components: Vec<f64>) -> Result<Self, GeometryError> {
        if components.len() < 2 {
            return Err(GeometryError::DimensionTooSmall(components.len()));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self(components))
    }

    /// Standard basis vector `e_index` in `dim` dimensions.
    pub fn basis(dim: usize, index: usize) -> Result<Self, GeometryError> {
        if index >= dim {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                got: index + 1,
            });
        }
        let mut components = vec![0.0; dim];
        components[index] = 1.0;
        Self::new(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Self) -> Result<f64, GeometryError> {
        self.check_dim(other)?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm_squared(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction. Zero vectors are rejected.
    pub fn normalized(&self) -> Result<Self, GeometryError> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(GeometryError::ZeroVector);
        }
        Ok(Self(self.0.iter().map(|c| c / norm).collect()))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self, GeometryError> {
        Self::new(self.0.iter().map(|c| c * factor).collect())
    }

    pub(crate) fn check_dim(&self, other: &Self) -> Result<(), GeometryError> {
        if self.dim() != other.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_nonzero(&self) -> Result<(), GeometryError> {
        if self.0.iter().all(|&c| c == 0.0) {
            return Err(GeometryError::ZeroVector);
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = GeometryError;

    fn try_from(components: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(components)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(v: EmbeddingVector) -> Self {
        v.0
    }
}

impl AsRef<[f64]> for EmbeddingVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine distance `1 - u·v / (‖u‖‖v‖)`, clamped to `[0, 2]`.
///
/// The denominator is taken as `sqrt(‖u‖²‖v‖²)`, so a vector compared with
/// itself yields exactly zero.
pub fn cosine_distance(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, GeometryError> {
    u.check_dim(v)?;
    let uu = u.norm_squared();
    let vv = v.norm_squared();
    if uu == 0.0 || vv == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    let cosine = dot(&u.0, &v.0) / (uu * vv).sqrt();
    Ok((1.0 - cosine).clamp(0.0, 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn cosine_distance_of_basis_vectors() {
        let e1 = v(&[1.0, 0.0]);
        let e2 = v(&[0.0, 1.0]);
        let minus_e1 = v(&[-1.0, 0.0]);
        assert_eq!(cosine_distance(&e1, &e1).unwrap(), 0.0);
        assert_eq!(cosine_distance(&e1, &e2).unwrap(), 1.0);
        assert_eq!(cosine_distance(&e1, &minus_e1).unwrap(), 2.0);
    }

    #[test]
    fn self_distance_is_exactly_zero() {
        let a = v(&[0.1, 0.7, -0.3, 1e-3, 42.0]);
        assert_eq!(cosine_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn rejects_zero_and_mismatched_vectors() {
        let z = v(&[0.0, 0.0]);
        let a = v(&[1.0, 2.0]);
        let b = v(&[1.0, 2.0, 3.0]);
        assert_eq!(cosine_distance(&z, &a), Err(GeometryError::ZeroVector));
        assert!(matches!(
            cosine_distance(&a, &b),
            Err(GeometryError::DimensionMismatch { expected: 2, got: 3 })
        ));
        assert_eq!(z.normalized(), Err(GeometryError::ZeroVector));
    }

    #[test]
    fn constructor_enforces_dimension_and_finiteness() {
        assert_eq!(
            EmbeddingVector::new(vec![1.0]),
            Err(GeometryError::DimensionTooSmall(1))
        );
        assert_eq!(
            EmbeddingVector::new(vec![1.0, f64::NAN]),
            Err(GeometryError::NonFinite)
        );
        let parsed: Result<EmbeddingVector, _> = serde_json::from_str("[1.0]");
        assert!(parsed.is_err());
    }
}
