//! Embedding chains generated from chosen planar rotations, so that the
//! rest of the crate can be checked against answers known in closed form.
//!
//! Each step maps `v ↦ s · G(u, w, θ) v + noise`, where
//! `G(u, w, θ) = I + sin θ (wuᵀ − uwᵀ) + (cos θ − 1)(uuᵀ + wwᵀ)` turns `u`
//! towards `w` by `θ` and fixes everything orthogonal to both.

use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::embedding::{seeded_unit_vector, EmbedderFingerprint};
use crate::engine::Trajectory;
use crate::geometry::{
    default_zero_tolerance, eigenvalues_on_span, representing_matrix, EmbeddingVector, GeometryError,
    RotationMatrix, Signature,
};

/// Plane vectors must be orthonormal to within this.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-12;

const V0_DOMAIN: &[u8] = b"linloop/synthetic/v0";
const NOISE_DOMAIN: &[u8] = b"linloop/synthetic/noise";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntheticError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("steps[{step}].plane: {reason}")]
    InvalidPlane { step: usize, reason: String },
    #[error("expected signature needs noise_sigma = 0, got {0}")]
    NoiseNotZero(f64),
    #[error("could not parse spec: {0}")]
    Parse(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Either a pair of coordinate axes `[i, j]` or explicit orthonormal `u`, `w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Plane {
    Axes([usize; 2]),
    Vectors { u: Vec<f64>, w: Vec<f64> },
}

impl Plane {
    fn resolve(&self, dim: usize, step: usize) -> Result<(DVector<f64>, DVector<f64>), SyntheticError> {
        let bad = |reason: String| SyntheticError::InvalidPlane { step, reason };
        match self {
            Plane::Axes([i, j]) => {
                if i == j {
                    return Err(bad(format!("axes must differ, got [{i}, {j}]")));
                }
                if *i >= dim || *j >= dim {
                    return Err(bad(format!("axes [{i}, {j}] out of range for dim {dim}")));
                }
                let mut u = DVector::zeros(dim);
                let mut w = DVector::zeros(dim);
                u[*i] = 1.0;
                w[*j] = 1.0;
                Ok((u, w))
            }
            Plane::Vectors { u, w } => {
                if u.len() != dim || w.len() != dim {
                    return Err(bad(format!(
                        "vectors have lengths {} and {}, expected {dim}",
                        u.len(),
                        w.len()
                    )));
                }
                if u.iter().chain(w).any(|x| !x.is_finite()) {
                    return Err(bad("non-finite component".into()));
                }
                let u = DVector::from_column_slice(u);
                let w = DVector::from_column_slice(w);
                let defects = [u.norm() - 1.0, w.norm() - 1.0, u.dot(&w)];
                if let Some(d) = defects.iter().find(|d| d.abs() > ORTHONORMAL_TOLERANCE) {
                    return Err(bad(format!("u, w not orthonormal (defect {d:e})")));
                }
                Ok((u, w))
            }
        }
    }
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticStep {
    pub plane: Plane,
    /// Radians, strictly inside `(−π, π)`.
    pub angle: f64,
    /// Norm ratio `‖v_i‖ / ‖v_{i−1}‖`.
    #[serde(default = "default_scale")]
    pub scale: f64,
}

/// Orthonormal `(u, w)` spanning one rotation plane.
type PlanePair = (DVector<f64>, DVector<f64>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub dim: usize,
    pub steps: Vec<SyntheticStep>,
    #[serde(default)]
    pub seed: u64,
    /// Standard deviation of isotropic Gaussian noise added after each step.
    #[serde(default)]
    pub noise_sigma: f64,
    /// Starting vector; a seeded random unit vector when absent.
    #[serde(default)]
    pub v0: Option<Vec<f64>>,
}

impl SyntheticSpec {
    pub fn from_toml_str(s: &str) -> Result<Self, SyntheticError> {
        let spec: Self = toml::from_str(s).map_err(|e| SyntheticError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SyntheticError> {
        let bad = |msg: String| Err(SyntheticError::InvalidSpec(msg));
        if self.dim < 2 {
            return bad(format!("dim must be at least 2, got {}", self.dim));
        }
        if self.steps.is_empty() {
            return bad("steps must not be empty".into());
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("noise_sigma must be >= 0, got {}", self.noise_sigma));
        }
        for (i, step) in self.steps.iter().enumerate() {
            if !(step.angle.is_finite() && step.angle.abs() < std::f64::consts::PI) {
                return bad(format!(
                    "steps[{i}].angle must be in (-pi, pi), got {}",
                    step.angle
                ));
            }
            if !(step.scale.is_finite() && step.scale > 0.0) {
                return bad(format!("steps[{i}].scale must be positive, got {}", step.scale));
            }
            step.plane.resolve(self.dim, i)?;
        }
        if let Some(v0) = &self.v0 {
            if v0.len() != self.dim {
                return bad(format!("v0 has length {}, expected {}", v0.len(), self.dim));
            }
            EmbeddingVector::new(v0.clone())?.check_nonzero()?;
        }
        Ok(())
    }

    fn planes(&self) -> Result<Vec<PlanePair>, SyntheticError> {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, s)| s.plane.resolve(self.dim, i))
            .collect()
    }

    fn start_vector(&self) -> Result<EmbeddingVector, SyntheticError> {
        match &self.v0 {
            Some(v0) => Ok(EmbeddingVector::new(v0.clone())?),
            None => {
                let mut material = V0_DOMAIN.to_vec();
                material.push(0);
                material.extend_from_slice(&self.seed.to_le_bytes());
                Ok(seeded_unit_vector(&material, self.dim))
            }
        }
    }
}

/// `a ← G(u, w, θ) a`, column by column.
fn rotate_left(a: &mut DMatrix<f64>, u: &DVector<f64>, w: &DVector<f64>, angle: f64) {
    let (s, c) = angle.sin_cos();
    let along_u = a.tr_mul(u);
    let along_w = a.tr_mul(w);
    a.ger(s, w, &along_u, 1.0);
    a.ger(-s, u, &along_w, 1.0);
    a.ger(c - 1.0, u, &along_u, 1.0);
    a.ger(c - 1.0, w, &along_w, 1.0);
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticChain {
    pub vectors: Vec<EmbeddingVector>,
    /// `G_L ⋯ G_1`, noise excluded.
    pub ground_truth_rotation: RotationMatrix,
}

impl SyntheticChain {
    /// Wraps the chain as a trajectory whose texts are `step-0`, `step-1`, ….
    pub fn to_trajectory(&self, spec: &SyntheticSpec, element_id: &str) -> Trajectory {
        let texts = (0..self.vectors.len()).map(|i| format!("step-{i}")).collect();
        Trajectory::new(
            element_id,
            texts,
            self.vectors.clone(),
            "synthetic",
            EmbedderFingerprint {
                model: format!("synthetic/seed-{}", spec.seed),
                dim: spec.dim,
            },
        )
        .expect("generated chains have at least two vectors of the spec dimension")
    }
}

pub fn generate_chain(spec: &SyntheticSpec) -> Result<SyntheticChain, SyntheticError> {
    spec.validate()?;
    let planes = spec.planes()?;
    let n = spec.dim;

    let mut noise_rng = {
        let mut material = NOISE_DOMAIN.to_vec();
        material.push(0);
        material.extend_from_slice(&spec.seed.to_le_bytes());
        let key: [u8; 32] = Sha256::digest(&material).into();
        ChaCha20Rng::from_seed(key)
    };
    let noise = (spec.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, spec.noise_sigma).expect("sigma validated finite and positive"));

    let v0 = spec.start_vector()?;
    let mut current = DMatrix::from_column_slice(n, 1, v0.as_slice());
    let mut truth = DMatrix::identity(n, n);
    let mut vectors = vec![v0];
    for (step, (u, w)) in spec.steps.iter().zip(&planes) {
        rotate_left(&mut current, u, w, step.angle);
        rotate_left(&mut truth, u, w, step.angle);
        current *= step.scale;
        if let Some(noise) = &noise {
            for x in current.iter_mut() {
                *x += noise.sample(&mut noise_rng);
            }
        }
        let v = EmbeddingVector::new(current.as_slice().to_vec())?;
        v.check_nonzero()?;
        vectors.push(v);
    }
    Ok(SyntheticChain {
        vectors,
        ground_truth_rotation: RotationMatrix::from_matrix_unchecked(truth),
    })
}

/// Signature of `Iₙ − sym(G_L ⋯ G_1)`. Its range lies in the span of the
/// step planes, which is what the eigensolve is restricted to.
pub fn expected_signature(
    spec: &SyntheticSpec,
    zero_tolerance: Option<f64>,
) -> Result<Signature, SyntheticError> {
    if spec.noise_sigma != 0.0 {
        return Err(SyntheticError::NoiseNotZero(spec.noise_sigma));
    }
    let chain = generate_chain(spec)?;
    let m = representing_matrix(&chain.ground_truth_rotation);
    let planes = spec.planes()?;
    let spanning: Vec<&[f64]> = planes
        .iter()
        .flat_map(|(u, w)| [u.as_slice(), w.as_slice()])
        .collect();
    let eigenvalues = eigenvalues_on_span(&m, &spanning)?;
    let tol = zero_tolerance.unwrap_or_else(|| default_zero_tolerance(&eigenvalues));
    Ok(Signature::from_eigenvalues(eigenvalues, tol))
}

/// Sidecar written next to a simulated trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spec: SyntheticSpec,
    pub dim: usize,
    /// Row-major `G_L ⋯ G_1`.
    pub ground_truth_rotation: Vec<f64>,
    /// Absent when the spec has noise.
    pub expected_signature: Option<Signature>,
}

impl GroundTruth {
    pub fn new(spec: &SyntheticSpec, chain: &SyntheticChain) -> Result<Self, SyntheticError> {
        let expected_signature = if spec.noise_sigma == 0.0 {
            Some(expected_signature(spec, None)?)
        } else {
            None
        };
        Ok(Self {
            spec: spec.clone(),
            dim: spec.dim,
            ground_truth_rotation: chain.ground_truth_rotation.to_row_major(),
            expected_signature,
        })
    }
}
