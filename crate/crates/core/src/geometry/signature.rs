use serde::{Deserialize, Serialize};

use super::{symmetric_eigenvalues, GeometryError, SymmetricMatrix};

/// Relative factor of the default zero tolerance.
pub const DEFAULT_RELATIVE_ZERO_TOLERANCE: f64 = 1e-9;

/// Inertia of a symmetric matrix plus the sign-normalized spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    pub n_plus: usize,
    pub n_zero: usize,
    pub n_minus: usize,
    /// Descending, each entry in `{+1, 0, −1}`.
    pub normalized_spectrum: Vec<i8>,
    /// Descending eigenvalues.
    pub raw_eigenvalues: Vec<f64>,
    pub zero_tolerance: f64,
}

impl Signature {
    /// Classifies already-computed eigenvalues; `|ρ| ≤ zero_tolerance` counts as zero.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, zero_tolerance: f64) -> Self {
        eigenvalues.sort_by(|x, y| y.total_cmp(x));
        let normalized_spectrum: Vec<i8> = eigenvalues
            .iter()
            .map(|&rho| {
                if rho.abs() <= zero_tolerance {
                    0
                } else if rho > 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        let count = |s: i8| normalized_spectrum.iter().filter(|&&x| x == s).count();
        Self {
            n_plus: count(1),
            n_zero: count(0),
            n_minus: count(-1),
            normalized_spectrum,
            raw_eigenvalues: eigenvalues,
            zero_tolerance,
        }
    }

    pub fn inertia(&self) -> (usize, usize, usize) {
        (self.n_plus, self.n_zero, self.n_minus)
    }

    pub fn dim(&self) -> usize {
        self.normalized_spectrum.len()
    }
}

/// `1e-9 · max(1, max |ρ|)`.
pub fn default_zero_tolerance(eigenvalues: &[f64]) -> f64 {
    let largest = eigenvalues.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    DEFAULT_RELATIVE_ZERO_TOLERANCE * largest.max(1.0)
}

pub fn signature_of(m: &SymmetricMatrix, zero_tolerance: f64) -> Result<Signature, GeometryError> {
    Ok(Signature::from_eigenvalues(
        symmetric_eigenvalues(m)?,
        zero_tolerance,
    ))
}

/// [`signature_of`] with [`default_zero_tolerance`].
pub fn signature_with_default_tolerance(m: &SymmetricMatrix) -> Result<Signature, GeometryError> {
    let eigenvalues = symmetric_eigenvalues(m)?;
    let tol = default_zero_tolerance(&eigenvalues);
    Ok(Signature::from_eigenvalues(eigenvalues, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_is_all_zero() {
        let sig = signature_of(&SymmetricMatrix::zeros(5), 1e-9).unwrap();
        assert_eq!(sig.inertia(), (0, 5, 0));
        assert_eq!(sig.normalized_spectrum, vec![0; 5]);
    }

    #[test]
    fn tolerance_classification() {
        let m = SymmetricMatrix::diagonal(&[5.0, -1e-15, -2.0]);
        let sig = signature_of(&m, 1e-9).unwrap();
        assert_eq!(sig.inertia(), (1, 1, 1));
        assert_eq!(sig.normalized_spectrum, vec![1, 0, -1]);
        assert_eq!(sig.raw_eigenvalues, vec![5.0, -1e-15, -2.0]);
    }

    #[test]
    fn default_tolerance_scales_with_spectrum() {
        assert_eq!(default_zero_tolerance(&[0.5, 0.0]), 1e-9);
        assert!((default_zero_tolerance(&[-300.0, 2.0]) - 3e-7).abs() < 1e-22);
    }
}
