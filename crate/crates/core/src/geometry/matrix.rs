use nalgebra::DMatrix;

use super::GeometryError;

/// Symmetry tolerance per unit of dimension: `‖M − Mᵀ‖_F ≤ 1e-12 · n`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// An `n × n` rotation. Instances built by this crate are special-orthogonal
/// up to roundoff; [`RotationMatrix::from_matrix`] checks that for foreign input.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationMatrix(DMatrix<f64>);

impl RotationMatrix {
    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Wraps a matrix after checking orthogonality (`‖RᵀR − I‖_F ≤ 1e-10·n`)
    /// and `det R = 1 ± 1e-9`.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self, GeometryError> {
        if !m.is_square() {
            return Err(GeometryError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let r = Self(m);
        let n = r.dim() as f64;
        let defect = r.orthogonality_defect();
        if defect > 1e-10 * n {
            return Err(GeometryError::NotOrthogonal(defect));
        }
        let det = r.determinant();
        if (det - 1.0).abs() > 1e-9 {
            return Err(GeometryError::NotSpecialOrthogonal(det));
        }
        Ok(r)
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    /// `‖RᵀR − I‖_F`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim();
        (self.0.tr_mul(&self.0) - DMatrix::<f64>::identity(n, n)).norm()
    }

    pub fn determinant(&self) -> f64 {
        self.0.clone().lu().determinant()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim(), "vector dimension must match matrix");
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        row_major(&self.0)
    }
}

/// A real symmetric `n × n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self, GeometryError> {
        if !m.is_square() {
            return Err(GeometryError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let asymmetry = (&m - m.transpose()).norm();
        if asymmetry > SYMMETRY_TOLERANCE * m.nrows() as f64 {
            return Err(GeometryError::NotSymmetric(asymmetry));
        }
        Ok(Self(m))
    }

    /// Builds from the upper triangle of `f(i, j)`, mirroring it exactly.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let x = f(i, j);
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        Self(m)
    }

    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self, GeometryError> {
        if entries.len() != dim * dim {
            return Err(GeometryError::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self(DMatrix::from_fn(
            n,
            n,
            |i, j| if i == j { values[i] } else { 0.0 },
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// `Sᵀ M S`, re-symmetrized entrywise.
    pub fn congruence(&self, s: &DMatrix<f64>) -> Result<Self, GeometryError> {
        if s.nrows() != self.dim() || !s.is_square() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: s.nrows(),
            });
        }
        let product = s.tr_mul(&(&self.0 * s));
        Ok(Self::from_fn(self.dim(), |i, j| {
            0.5 * (product[(i, j)] + product[(j, i)])
        }))
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        row_major(&self.0)
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// `(R + Rᵀ) / 2`.
pub fn symmetric_part(r: &RotationMatrix) -> SymmetricMatrix {
    let m = r.matrix();
    SymmetricMatrix::from_fn(r.dim(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

/// `Iₙ − (R + Rᵀ)/2`, the matrix whose quadratic form at `v̂₀` is the
/// semantic deficit of the chain that produced `R`.
pub fn representing_matrix(r: &RotationMatrix) -> SymmetricMatrix {
    let m = r.matrix();
    SymmetricMatrix::from_fn(r.dim(), |i, j| {
        let sym = 0.5 * (m[(i, j)] + m[(j, i)]);
        if i == j {
            1.0 - sym
        } else {
            -sym
        }
    })
}
