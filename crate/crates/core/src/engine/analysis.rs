use serde::{Deserialize, Serialize};

use super::{EngineError, Trajectory};
use crate::geometry::{
    compose_chain_with, cosine_distance, default_zero_tolerance, eigenvalues_on_vector_span, quadratic_form,
    representing_matrix, Signature, DEFAULT_ANTIPODAL_ETA,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub xi: f64,
    /// `None` selects `1e-9 · max(1, max |ρ|)`.
    pub zero_tolerance: Option<f64>,
    pub antipodal_eta: f64,
}

impl AnalysisOptions {
    pub fn new(xi: f64) -> Self {
        Self {
            xi,
            zero_tolerance: None,
            antipodal_eta: DEFAULT_ANTIPODAL_ETA,
        }
    }
}

/// Per-element result of [`analyze`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeficitReport {
    pub element_id: String,
    pub sequence_ref: String,
    /// Cosine distance between the first and last embeddings.
    pub delta: f64,
    /// `v̂₀ᵀ (Iₙ − R*) v̂₀` for the composed minimal rotation `R`.
    pub q_value: f64,
    pub identity_gap: f64,
    pub signature: Signature,
    /// `d(v_{i−1}, v_i)` for `i = 1..=L`.
    pub per_step_distances: Vec<f64>,
    pub xi: f64,
    pub is_loop_member: bool,
}

/// Corpus-level loop verdict for one sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopVerdict {
    pub sequence_ref: String,
    pub xi: f64,
    pub n_elements: usize,
    pub max_deficit: f64,
    pub mean_deficit: f64,
    pub is_loop: bool,
    /// Elements whose trajectory could not be built.
    #[serde(default)]
    pub n_failed: usize,
    #[serde(default)]
    pub partial: bool,
}

impl LoopVerdict {
    pub fn with_failures(mut self, n_failed: usize) -> Self {
        self.n_failed = n_failed;
        self.partial = n_failed > 0;
        self
    }
}

/// `d(v₀, v_L)`; the intermediate vectors play no part.
pub fn semantic_deficit(traj: &Trajectory) -> Result<f64, EngineError> {
    Ok(cosine_distance(traj.first_vector(), traj.last_vector())?)
}

/// Full invariant analysis of one trajectory.
pub fn analyze(traj: &Trajectory, options: &AnalysisOptions) -> Result<DeficitReport, EngineError> {
    if !(options.xi.is_finite() && options.xi > 0.0) {
        return Err(EngineError::InvalidThreshold(format!(
            "xi must be positive, got {}",
            options.xi
        )));
    }
    let vectors = traj.vectors();
    let rotation = compose_chain_with(vectors, options.antipodal_eta)?;
    let m = representing_matrix(&rotation);
    let q_value = quadratic_form(&traj.first_vector().normalized()?, &m)?;
    let delta = semantic_deficit(traj)?;

    // Every factor fixes the complement of span{v_i}, so the representing
    // matrix lives on that span and can be diagonalized there.
    let eigenvalues = eigenvalues_on_vector_span(&m, vectors)?;
    let tolerance = options
        .zero_tolerance
        .unwrap_or_else(|| default_zero_tolerance(&eigenvalues));
    let signature = Signature::from_eigenvalues(eigenvalues, tolerance);

    let per_step_distances = vectors
        .windows(2)
        .map(|w| cosine_distance(&w[0], &w[1]))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(DeficitReport {
        element_id: traj.element_id().to_string(),
        sequence_ref: traj.sequence_ref().to_string(),
        delta,
        q_value,
        identity_gap: (delta - q_value).abs(),
        signature,
        per_step_distances,
        xi: options.xi,
        is_loop_member: delta < options.xi,
    })
}

/// `is_loop ⇔ max δ < ξ` over the sampled elements.
pub fn classify_loop(reports: &[DeficitReport], xi: f64) -> Result<LoopVerdict, EngineError> {
    let first = reports.first().ok_or(EngineError::EmptyReportSet)?;
    for r in reports {
        if r.sequence_ref != first.sequence_ref {
            return Err(EngineError::MixedSequences {
                expected: first.sequence_ref.clone(),
                found: r.sequence_ref.clone(),
            });
        }
        if r.xi != xi {
            return Err(EngineError::MixedThresholds {
                element_id: r.element_id.clone(),
                expected: xi,
                found: r.xi,
            });
        }
    }
    // Sorting first makes the sum independent of corpus order.
    let mut deltas: Vec<f64> = reports.iter().map(|r| r.delta).collect();
    deltas.sort_by(f64::total_cmp);
    let max_deficit = *deltas.last().expect("non-empty");
    let mean_deficit = deltas.iter().sum::<f64>() / deltas.len() as f64;
    Ok(LoopVerdict {
        sequence_ref: first.sequence_ref.clone(),
        xi,
        n_elements: reports.len(),
        max_deficit,
        mean_deficit,
        is_loop: max_deficit < xi,
        n_failed: 0,
        partial: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::EmbedderFingerprint;
    use crate::geometry::EmbeddingVector;

    fn traj(vectors: &[&[f64]]) -> Trajectory {
        let dim = vectors[0].len();
        Trajectory::new(
            "e",
            (0..vectors.len()).map(|i| format!("t{i}")).collect(),
            vectors
                .iter()
                .map(|v| EmbeddingVector::new(v.to_vec()).unwrap())
                .collect(),
            "s",
            EmbedderFingerprint {
                model: "m".into(),
                dim,
            },
        )
        .unwrap()
    }

    fn report(delta: f64, xi: f64) -> DeficitReport {
        DeficitReport {
            element_id: format!("e{delta}"),
            sequence_ref: "s".into(),
            delta,
            q_value: delta,
            identity_gap: 0.0,
            signature: Signature::from_eigenvalues(vec![0.0, 0.0], 1e-9),
            per_step_distances: vec![delta],
            xi,
            is_loop_member: delta < xi,
        }
    }

    #[test]
    fn deficit_depends_only_on_endpoints() {
        assert_eq!(
            semantic_deficit(&traj(&[&[1.0, 0.0], &[0.3, 0.9], &[1.0, 0.0]])).unwrap(),
            0.0
        );
        assert_eq!(semantic_deficit(&traj(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap(), 1.0);
    }

    #[test]
    fn identity_trajectory() {
        let t = traj(&[&[0.2, 0.5, -0.1, 0.7], &[0.2, 0.5, -0.1, 0.7]]);
        let r = analyze(&t, &AnalysisOptions::new(0.3)).unwrap();
        assert_eq!(r.delta, 0.0);
        assert_eq!(r.q_value, 0.0);
        assert_eq!(r.signature.inertia(), (0, 4, 0));
        assert_eq!(r.per_step_distances, vec![0.0]);
        assert!(r.is_loop_member);
    }

    #[test]
    fn back_and_forth_in_one_plane() {
        let t = traj(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]]);
        let r = analyze(&t, &AnalysisOptions::new(0.3)).unwrap();
        assert_eq!(r.delta, 0.0);
        assert!(r.q_value.abs() < 1e-15);
        assert_eq!(r.signature.inertia(), (0, 3, 0));
        assert_eq!(r.per_step_distances, vec![1.0, 1.0]);
    }

    #[test]
    fn rejects_nonpositive_xi() {
        let t = traj(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(
            analyze(&t, &AnalysisOptions::new(0.0)),
            Err(EngineError::InvalidThreshold(_))
        ));
    }

    #[test]
    fn classification_is_strict() {
        let v = classify_loop(&[report(0.0, 0.3)], 0.3).unwrap();
        assert!(v.is_loop);
        let v = classify_loop(&[report(0.1, 0.3), report(0.29, 0.3)], 0.3).unwrap();
        assert!(v.is_loop);
        assert_eq!(v.max_deficit, 0.29);
        assert_eq!(v.n_elements, 2);
        let v = classify_loop(&[report(0.1, 0.3), report(0.31, 0.3)], 0.3).unwrap();
        assert!(!v.is_loop);
        let v = classify_loop(&[report(0.3, 0.3)], 0.3).unwrap();
        assert!(!v.is_loop, "a tie at xi is not a loop");
    }

    #[test]
    fn classification_errors() {
        assert_eq!(classify_loop(&[], 0.3), Err(EngineError::EmptyReportSet));
        let mut other = report(0.1, 0.3);
        other.sequence_ref = "t".into();
        assert!(matches!(
            classify_loop(&[report(0.1, 0.3), other], 0.3),
            Err(EngineError::MixedSequences { .. })
        ));
        assert!(matches!(
            classify_loop(&[report(0.1, 0.2)], 0.3),
            Err(EngineError::MixedThresholds { .. })
        ));
    }
}
