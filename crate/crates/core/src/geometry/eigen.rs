//! Cyclic Jacobi eigenvalue iteration for real symmetric matrices.

use nalgebra::{DMatrix, DVector};

use super::{EmbeddingVector, GeometryError, SymmetricMatrix};

pub const MAX_SWEEPS: usize = 100;

/// Sweeps stop once `off(A) < CONVERGENCE · ‖M‖_F`.
pub const CONVERGENCE: f64 = 1e-12;

/// Eigenvalues of `m`, sorted descending.
pub fn symmetric_eigenvalues(m: &SymmetricMatrix) -> Result<Vec<f64>, GeometryError> {
    let n = m.dim();
    // Row-major working copy; both triangles are kept in sync.
    let mut a = m.to_row_major();
    let scale = m.frobenius_norm();
    let target = CONVERGENCE * scale;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a, n);
        if off <= target {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(GeometryError::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, n, p, q);
            }
        }
        sweeps += 1;
    }

    let mut eigenvalues: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eigenvalues.sort_by(|x, y| y.total_cmp(x));
    Ok(eigenvalues)
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += a[i * n + j] * a[i * n + j];
        }
    }
    (2.0 * sum).sqrt()
}

/// Annihilates `a[p][q]` with the symmetric Schur rotation `A ← JᵀAJ`.
fn rotate(a: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let tau = (aqq - app) / (2.0 * apq);
    let t = if tau.abs() > 1e150 {
        0.5 / tau
    } else {
        tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        a[k * n + p] = new_kp;
        a[p * n + k] = new_kp;
        a[k * n + q] = new_kq;
        a[q * n + k] = new_kq;
    }
}

/// Orthonormal basis (columns) for the span of `vectors`, by modified
/// Gram-Schmidt with one reorthogonalization pass. Directions whose residual
/// falls below `1e-13` of their original norm are dropped.
pub fn orthonormal_span(vectors: &[&[f64]], dim: usize) -> DMatrix<f64> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        debug_assert_eq!(v.len(), dim);
        let mut r = DVector::from_column_slice(v);
        let original = r.norm();
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&r);
                r.axpy(-proj, b, 1.0);
            }
        }
        let residual = r.norm();
        if residual > 1e-13 * original {
            basis.push(r / residual);
        }
    }
    if basis.is_empty() {
        return DMatrix::zeros(dim, 0);
    }
    DMatrix::from_columns(&basis)
}

/// Eigenvalues of `m` when its range is contained in `span{vectors}`, found
/// by diagonalizing the `k × k` compression `QᵀMQ` and padding with `n − k`
/// exact zeros.
///
/// The containment is verified (`‖M − Q(QᵀMQ)Qᵀ‖_F ≤ 1e-10 · max(1, ‖M‖_F)`);
/// if it does not hold, or the span is the whole space, the full matrix is
/// diagonalized instead. Either way the result is the spectrum of `m`.
pub fn eigenvalues_on_span(m: &SymmetricMatrix, vectors: &[&[f64]]) -> Result<Vec<f64>, GeometryError> {
    let n = m.dim();
    if let Some(v) = vectors.iter().find(|v| v.len() != n) {
        return Err(GeometryError::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    let q = orthonormal_span(vectors, n);
    let k = q.ncols();
    if k >= n {
        return symmetric_eigenvalues(m);
    }

    let mq = m.matrix() * &q;
    let compressed = q.tr_mul(&mq);
    let compressed = SymmetricMatrix::from_fn(k, |i, j| 0.5 * (compressed[(i, j)] + compressed[(j, i)]));
    let rebuilt = &q * (compressed.matrix() * q.transpose());
    let residual = (m.matrix() - rebuilt).norm();
    if residual > 1e-10 * m.frobenius_norm().max(1.0) {
        tracing::debug!(residual, "range not contained in span; using full eigensolve");
        return symmetric_eigenvalues(m);
    }

    let mut eigenvalues = symmetric_eigenvalues(&compressed)?;
    eigenvalues.extend(std::iter::repeat_n(0.0, n - k));
    eigenvalues.sort_by(|x, y| y.total_cmp(x));
    Ok(eigenvalues)
}

/// Convenience over [`eigenvalues_on_span`] for embedding vectors.
pub fn eigenvalues_on_vector_span(
    m: &SymmetricMatrix,
    vectors: &[EmbeddingVector],
) -> Result<Vec<f64>, GeometryError> {
    let slices: Vec<&[f64]> = vectors.iter().map(|v| v.as_slice()).collect();
    eigenvalues_on_span(m, &slices)
}
