//! Minimal (single-plane) rotations and their composition along a chain.
//!
//! The rotation taking `x̂` to `ŷ` while fixing the orthogonal complement of
//! `span{x̂, ŷ}` is
//!
//! ```text
//! R = I + K + K² / (1 + x̂ᵀŷ),   K = ŷx̂ᵀ − x̂ŷᵀ
//! ```
//!
//! Expanding `K² = (1 + c)(ŷx̂ᵀ + x̂ŷᵀ) − (x̂ + ŷ)(x̂ + ŷ)ᵀ` with `c = x̂ᵀŷ` and
//! using `‖x̂ + ŷ‖² = 2(1 + c)` gives the equivalent rank-2 form
//!
//! ```text
//! R = I − 2ĥĥᵀ + 2ŷx̂ᵀ,   ĥ = (x̂ + ŷ) / ‖x̂ + ŷ‖
//! ```
//!
//! which is what is evaluated here. It never divides by `1 + c` directly, so
//! accuracy holds up as the pair approaches antipodality, and it lets a chain
//! be composed with `O(n²)` work per factor instead of a dense product.

use nalgebra::{DMatrix, DVector};

use super::{EmbeddingVector, GeometryError, RotationMatrix, SymmetricMatrix};

/// Pairs with `1 + x̂·ŷ` at or below this are treated as antipodal.
pub const DEFAULT_ANTIPODAL_ETA: f64 = 1e-8;

/// A basis vector is usable for the antipodal plane only if its projection
/// orthogonal to `x̂` has at least this norm.
const ANTIPODAL_BASIS_FLOOR: f64 = 1e-6;

/// Tolerance on `‖v̂‖ − 1` accepted by [`quadratic_form`].
pub const UNIT_NORM_TOLERANCE: f64 = 1e-12;

/// `I − 2ĥĥᵀ + 2ŷx̂ᵀ`, kept in factored form.
#[derive(Clone, Debug)]
struct PlaneRotation {
    x: DVector<f64>,
    y: DVector<f64>,
    h: DVector<f64>,
}

impl PlaneRotation {
    /// Requires unit `x`, `y` with `1 + x·y` bounded away from zero.
    fn new(x: DVector<f64>, y: DVector<f64>) -> Self {
        let sum = &x + &y;
        let h = &sum / sum.norm();
        Self { x, y, h }
    }

    /// `a ← R a`.
    fn apply_left(&self, a: &mut DMatrix<f64>) {
        let along_h = a.tr_mul(&self.h);
        let along_x = a.tr_mul(&self.x);
        a.ger(-2.0, &self.h, &along_h, 1.0);
        a.ger(2.0, &self.y, &along_x, 1.0);
    }
}

#[derive(Clone, Debug)]
enum Factor {
    /// `x̂ == ŷ` exactly.
    Identity,
    Plane(PlaneRotation),
    Dense(DMatrix<f64>),
}

impl Factor {
    fn between(x: &EmbeddingVector, y: &EmbeddingVector, eta: f64) -> Result<Self, GeometryError> {
        x.check_dim(y)?;
        x.check_nonzero()?;
        y.check_nonzero()?;
        let x_hat = DVector::from_vec(x.normalized()?.into_inner());
        let y_hat = DVector::from_vec(y.normalized()?.into_inner());
        if x_hat == y_hat {
            return Ok(Factor::Identity);
        }
        if 1.0 + x_hat.dot(&y_hat) <= eta {
            return Ok(Factor::Dense(antipodal_rotation(&x_hat, &y_hat)));
        }
        Ok(Factor::Plane(PlaneRotation::new(x_hat, y_hat)))
    }

    fn apply_left(&self, a: &mut DMatrix<f64>) {
        match self {
            Factor::Identity => {}
            Factor::Plane(p) => p.apply_left(a),
            Factor::Dense(m) => *a = m * &*a,
        }
    }

    fn into_matrix(self, dim: usize) -> DMatrix<f64> {
        match self {
            Factor::Identity => DMatrix::identity(dim, dim),
            Factor::Plane(p) => {
                let mut m = DMatrix::identity(dim, dim);
                p.apply_left(&mut m);
                m
            }
            Factor::Dense(m) => m,
        }
    }
}

/// Fallback for `x̂ ≈ −ŷ`, where the plane of the pair is numerically undefined.
///
/// Rotates by π in the plane of `x̂` and the lowest-index basis vector `e_k`
/// with a usable component orthogonal to `x̂`, then applies the (small,
/// well-conditioned) minimal rotation from `−x̂` to `ŷ` so the result still
/// maps `x̂` onto `ŷ`.
fn antipodal_rotation(x_hat: &DVector<f64>, y_hat: &DVector<f64>) -> DMatrix<f64> {
    let n = x_hat.len();
    let k = (0..n)
        .find(|&k| (1.0 - x_hat[k] * x_hat[k]).max(0.0).sqrt() >= ANTIPODAL_BASIS_FLOOR)
        .expect("a unit vector in n >= 2 dimensions is orthogonal enough to some basis vector");
    let mut w = x_hat * -x_hat[k];
    w[k] += 1.0;
    let w = &w / w.norm();

    let mut half_turn = DMatrix::identity(n, n);
    half_turn.ger(-2.0, x_hat, x_hat, 1.0);
    half_turn.ger(-2.0, &w, &w, 1.0);

    PlaneRotation::new(-x_hat, y_hat.clone()).apply_left(&mut half_turn);
    half_turn
}

/// The minimal rotation taking `x̂` to `ŷ`, with the default antipodal threshold.
pub fn minimal_rotation(x: &EmbeddingVector, y: &EmbeddingVector) -> Result<RotationMatrix, GeometryError> {
    minimal_rotation_with(x, y, DEFAULT_ANTIPODAL_ETA)
}

pub fn minimal_rotation_with(
    x: &EmbeddingVector,
    y: &EmbeddingVector,
    antipodal_eta: f64,
) -> Result<RotationMatrix, GeometryError> {
    let factor = Factor::between(x, y, antipodal_eta)?;
    Ok(RotationMatrix::from_matrix_unchecked(factor.into_matrix(x.dim())))
}

/// Composes the minimal rotations along `vectors`, newest step leftmost:
/// `R = R̃(v_{L−1}, v_L) ⋯ R̃(v_0, v_1)`. A single vector yields `Iₙ`.
pub fn compose_chain(vectors: &[EmbeddingVector]) -> Result<RotationMatrix, GeometryError> {
    compose_chain_with(vectors, DEFAULT_ANTIPODAL_ETA)
}

pub fn compose_chain_with(
    vectors: &[EmbeddingVector],
    antipodal_eta: f64,
) -> Result<RotationMatrix, GeometryError> {
    let first = vectors.first().ok_or(GeometryError::EmptyChain)?;
    for v in vectors {
        first.check_dim(v)?;
        v.check_nonzero()?;
    }
    let mut r = RotationMatrix::identity(first.dim());
    for pair in vectors.windows(2) {
        Factor::between(&pair[0], &pair[1], antipodal_eta)?.apply_left(r.matrix_mut());
    }
    Ok(r)
}

/// `v̂ᵀ M v̂` for a unit vector `v̂`.
pub fn quadratic_form(v_hat: &EmbeddingVector, m: &SymmetricMatrix) -> Result<f64, GeometryError> {
    if v_hat.dim() != m.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: m.dim(),
            got: v_hat.dim(),
        });
    }
    let norm = v_hat.norm();
    if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
        return Err(GeometryError::NotUnitNorm(norm));
    }
    let v = DVector::from_column_slice(v_hat.as_slice());
    Ok(v.dot(&(m.matrix() * &v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cosine_distance, representing_matrix};

    fn v(c: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn parallel_pair_gives_identity() {
        let r = minimal_rotation(&v(&[3.0, 0.0]), &v(&[3.0, 0.0])).unwrap();
        assert_eq!(r, RotationMatrix::identity(2));
    }

    #[test]
    fn quarter_turn_in_the_plane() {
        let r = minimal_rotation(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap();
        let expected = [[0.0, -1.0], [1.0, 0.0]];
        for (i, row) in expected.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                assert!((r.get(i, j) - e).abs() < 1e-15, "{r:?}");
            }
        }
    }

    #[test]
    fn single_vector_chain_is_identity() {
        let r = compose_chain(&[v(&[0.3, 0.4, 0.5])]).unwrap();
        assert_eq!(r, RotationMatrix::identity(3));
    }

    #[test]
    fn two_vector_chain_matches_minimal_rotation() {
        let x = v(&[0.3, -1.2, 0.5]);
        let y = v(&[2.0, 0.1, -0.4]);
        let chain = compose_chain(&[x.clone(), y.clone()]).unwrap();
        let single = minimal_rotation(&x, &y).unwrap();
        assert!((chain.matrix() - single.matrix()).amax() < 1e-15);
    }

    #[test]
    fn back_and_forth_cancels() {
        let e1 = v(&[1.0, 0.0, 0.0]);
        let e2 = v(&[0.0, 1.0, 0.0]);
        let r = compose_chain(&[e1.clone(), e2, e1]).unwrap();
        assert!((r.matrix() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn chain_errors() {
        assert_eq!(compose_chain(&[]), Err(GeometryError::EmptyChain));
        assert!(matches!(
            compose_chain(&[v(&[1.0, 0.0]), v(&[1.0, 0.0, 0.0])]),
            Err(GeometryError::DimensionMismatch { .. })
        ));
        assert_eq!(
            compose_chain(&[v(&[1.0, 0.0]), v(&[0.0, 0.0])]),
            Err(GeometryError::ZeroVector)
        );
        assert_eq!(
            minimal_rotation(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])),
            Err(GeometryError::ZeroVector)
        );
    }

    #[test]
    fn exact_antipode_uses_half_turn_in_lowest_usable_plane() {
        let x = v(&[1.0, 0.0, 0.0]);
        let y = v(&[-1.0, 0.0, 0.0]);
        let r = minimal_rotation(&x, &y).unwrap();
        // e1 is parallel to x, so the half turn happens in the (e1, e2) plane.
        let expected = DMatrix::from_row_slice(3, 3, &[-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((r.matrix() - expected).amax() < 1e-15, "{r:?}");
    }

    #[test]
    fn quadratic_form_checks() {
        let zero = SymmetricMatrix::zeros(2);
        let e1 = v(&[1.0, 0.0]);
        assert_eq!(quadratic_form(&e1, &zero).unwrap(), 0.0);

        let theta = 0.9_f64;
        let m = SymmetricMatrix::diagonal(&[1.0 - theta.cos(), 1.0 - theta.cos()]);
        assert!((quadratic_form(&e1, &m).unwrap() - (1.0 - theta.cos())).abs() < 1e-15);

        assert!(matches!(
            quadratic_form(&v(&[2.0, 0.0]), &zero),
            Err(GeometryError::NotUnitNorm(_))
        ));
        assert!(matches!(
            quadratic_form(&v(&[1.0, 0.0, 0.0]), &zero),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn deficit_identity_on_small_chain() {
        let chain = [v(&[1.0, 2.0, 0.5]), v(&[-0.3, 1.0, 2.0]), v(&[0.2, -0.1, 1.0])];
        let m = representing_matrix(&compose_chain(&chain).unwrap());
        let q = quadratic_form(&chain[0].normalized().unwrap(), &m).unwrap();
        let delta = cosine_distance(&chain[0], &chain[2]).unwrap();
        assert!((q - delta).abs() < 1e-12);
    }
}
