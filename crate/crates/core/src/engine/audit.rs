//! Reversibility and coherence audits of a single transformation over a
//! sampled corpus.
//!
//! Reversibility: `d(U⁻¹(U(λ)), λ) < ε` for every sampled `λ`.
//!
//! Coherence: with `μ = U⁻¹(U(λ))` as the element similar to `λ`, the images
//! must stay close, `d(U(λ), U(μ)) < f_scale · ε`. The record also carries
//! `d(U⁻¹(U(λ)), λ)` compared against the same bound, under `as_printed`.

use serde::{Deserialize, Serialize};

use super::{CorpusElement, EngineError, Pipeline};
use crate::geometry::{cosine_distance, EmbeddingVector};
use crate::transform::{apply_step, inverse_step, TransformationStep};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMode {
    Reversibility,
    Coherence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub step_id: String,
    pub inverse_step_id: String,
    pub mode: AuditMode,
    pub epsilon: f64,
    /// Present for coherence audits.
    pub f_scale: Option<f64>,
    /// The bound each distance must stay strictly below.
    pub bound: f64,
    pub n_elements: usize,
    pub element_ids: Vec<String>,
    pub distances: Vec<f64>,
    /// Coherence only: `d(U⁻¹(U(λ)), λ)` per element.
    pub as_printed: Option<Vec<f64>>,
    /// Coherence only: whether the step passed reversibility at `epsilon`
    /// on this corpus, which the coherence reading presupposes.
    pub reversible: Option<bool>,
    pub pass_fraction: f64,
    pub passes: bool,
}

impl AuditRecord {
    fn from_distances(
        step: &TransformationStep,
        inverse: &TransformationStep,
        mode: AuditMode,
        epsilon: f64,
        f_scale: Option<f64>,
        corpus: &[CorpusElement],
        distances: Vec<f64>,
    ) -> Self {
        let bound = epsilon * f_scale.unwrap_or(1.0);
        let passing = distances.iter().filter(|&&d| d < bound).count();
        Self {
            step_id: step.id.clone(),
            inverse_step_id: inverse.id.clone(),
            mode,
            epsilon,
            f_scale,
            bound,
            n_elements: distances.len(),
            element_ids: corpus.iter().map(|e| e.id.clone()).collect(),
            pass_fraction: passing as f64 / distances.len() as f64,
            passes: passing == distances.len(),
            distances,
            as_printed: None,
            reversible: None,
        }
    }
}

fn check_inputs(corpus: &[CorpusElement], epsilon: f64) -> Result<(), EngineError> {
    if corpus.is_empty() {
        return Err(EngineError::EmptyCorpus);
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(EngineError::InvalidThreshold(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// Applies `steps` in order to `text`, failing with the offending step.
fn run_steps(
    pipeline: &Pipeline<'_>,
    text: &str,
    steps: &[&TransformationStep],
) -> Result<Vec<String>, EngineError> {
    let mut outputs = Vec::with_capacity(steps.len());
    let mut current = text.to_string();
    for (i, step) in steps.iter().enumerate() {
        current =
            apply_step(&current, step, pipeline.transformer).map_err(|cause| EngineError::Provider {
                step: step.id.clone(),
                index: i + 1,
                cause,
            })?;
        outputs.push(current.clone());
    }
    Ok(outputs)
}

/// Embeds groups of texts in one batch and hands back the vectors per group.
fn embed_groups(
    pipeline: &Pipeline<'_>,
    groups: Vec<Vec<String>>,
) -> Result<Vec<Vec<EmbeddingVector>>, EngineError> {
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let flat: Vec<String> = groups.into_iter().flatten().collect();
    let mut vectors = pipeline.embedder.embed_batch(&flat)?.into_iter();
    Ok(sizes
        .into_iter()
        .map(|n| vectors.by_ref().take(n).collect())
        .collect())
}

impl Pipeline<'_> {
    pub fn audit_reversibility(
        &self,
        step: &TransformationStep,
        corpus: &[CorpusElement],
        epsilon: f64,
    ) -> Result<AuditRecord, EngineError> {
        check_inputs(corpus, epsilon)?;
        let inverse = inverse_step(step)?;
        let texts = self
            .map_elements(corpus, |e| {
                run_steps(self, &e.text, &[step, &inverse]).map(|out| vec![e.text.clone(), out[1].clone()])
            })
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        let vectors = embed_groups(self, texts)?;
        let distances = vectors
            .iter()
            .map(|v| cosine_distance(&v[1], &v[0]))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AuditRecord::from_distances(
            step,
            &inverse,
            AuditMode::Reversibility,
            epsilon,
            None,
            corpus,
            distances,
        ))
    }

    pub fn audit_coherence(
        &self,
        step: &TransformationStep,
        corpus: &[CorpusElement],
        epsilon: f64,
        f_scale: f64,
    ) -> Result<AuditRecord, EngineError> {
        check_inputs(corpus, epsilon)?;
        if !(f_scale.is_finite() && f_scale > 0.0) {
            return Err(EngineError::InvalidThreshold(format!(
                "f_scale must be positive, got {f_scale}"
            )));
        }
        let inverse = inverse_step(step)?;
        // [λ, U(λ), μ = U⁻¹(U(λ)), U(μ)]
        let texts = self
            .map_elements(corpus, |e| {
                run_steps(self, &e.text, &[step, &inverse, step]).map(|out| {
                    let mut group = vec![e.text.clone()];
                    group.extend(out);
                    group
                })
            })
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        let vectors = embed_groups(self, texts)?;
        let mut distances = Vec::with_capacity(vectors.len());
        let mut as_printed = Vec::with_capacity(vectors.len());
        for v in &vectors {
            distances.push(cosine_distance(&v[1], &v[3])?);
            as_printed.push(cosine_distance(&v[2], &v[0])?);
        }
        let reversible = as_printed.iter().all(|&d| d < epsilon);
        let mut record = AuditRecord::from_distances(
            step,
            &inverse,
            AuditMode::Coherence,
            epsilon,
            Some(f_scale),
            corpus,
            distances,
        );
        record.as_printed = Some(as_printed);
        record.reversible = Some(reversible);
        Ok(record)
    }
}

pub fn audit_reversibility(
    step: &TransformationStep,
    corpus: &[CorpusElement],
    epsilon: f64,
    pipeline: &Pipeline<'_>,
) -> Result<AuditRecord, EngineError> {
    pipeline.audit_reversibility(step, corpus, epsilon)
}

pub fn audit_coherence(
    step: &TransformationStep,
    corpus: &[CorpusElement],
    epsilon: f64,
    f_scale: f64,
    pipeline: &Pipeline<'_>,
) -> Result<AuditRecord, EngineError> {
    pipeline.audit_coherence(step, corpus, epsilon, f_scale)
}
