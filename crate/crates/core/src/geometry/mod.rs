//! Linear-algebra kernels: cosine distance, minimal rotations, chain
//! composition, representing matrices, a Jacobi eigensolver and signatures.
//!
//! Everything here is a pure function of its inputs.

mod eigen;
mod matrix;
mod rotation;
mod signature;
mod vector;

use thiserror::Error;

pub use eigen::{
    eigenvalues_on_span, eigenvalues_on_vector_span, orthonormal_span, symmetric_eigenvalues, CONVERGENCE,
    MAX_SWEEPS,
};
pub use matrix::{representing_matrix, symmetric_part, RotationMatrix, SymmetricMatrix};
pub use rotation::{
    compose_chain, compose_chain_with, minimal_rotation, minimal_rotation_with, quadratic_form,
    DEFAULT_ANTIPODAL_ETA, UNIT_NORM_TOLERANCE,
};
pub use signature::{
    default_zero_tolerance, signature_of, signature_with_default_tolerance, Signature,
    DEFAULT_RELATIVE_ZERO_TOLERANCE,
};
pub use vector::{cosine_distance, EmbeddingVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("non-finite component")]
    NonFinite,
    #[error("chain must contain at least one vector")]
    EmptyChain,
    #[error("expected a unit vector, norm is {0}")]
    NotUnitNorm(f64),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (‖M − Mᵀ‖_F = {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not orthogonal (‖RᵀR − I‖_F = {0:e})")]
    NotOrthogonal(f64),
    #[error("rotation determinant is {0}, expected 1")]
    NotSpecialOrthogonal(f64),
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
}
