//! Trajectories, semantic deficits, loop classification and transformation
//! audits.

mod analysis;
mod audit;
mod build;
mod trajectory;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbedError;
use crate::geometry::{GeometryError, DEFAULT_ANTIPODAL_ETA};
use crate::transform::{TransformError, TransformationStep};

pub use analysis::{analyze, classify_loop, semantic_deficit, AnalysisOptions, DeficitReport, LoopVerdict};
pub use audit::{audit_coherence, audit_reversibility, AuditMode, AuditRecord};
pub use build::{build_trajectory, CorpusElement, Pipeline};
pub use trajectory::{Trajectory, TrajectoryError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("element text is empty")]
    EmptyElement,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("step {step:?} (#{index}) failed: {cause}")]
    Provider {
        step: String,
        index: usize,
        cause: TransformError,
    },
    #[error("step {step:?} (#{index}) produced text outside the accepted space")]
    Closure { step: String, index: usize },
    #[error(transparent)]
    Embedding(#[from] EmbedError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("no reports to classify")]
    EmptyReportSet,
    #[error("reports mix sequences {expected:?} and {found:?}")]
    MixedSequences { expected: String, found: String },
    #[error("report for {element_id:?} used xi = {found}, expected {expected}")]
    MixedThresholds {
        element_id: String,
        expected: f64,
        found: f64,
    },
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// `𝒰 = {𝕀, U₁, …, U_L}`. The leading identity is implicit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub id: String,
    pub steps: Vec<TransformationStep>,
}

impl SequenceSpec {
    pub fn new(id: impl Into<String>, steps: Vec<TransformationStep>) -> Result<Self, EngineError> {
        let spec = Self { id: id.into(), steps };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.id.trim().is_empty() {
            return Err(EngineError::InvalidSequence("sequence id is empty".into()));
        }
        if self.steps.is_empty() {
            return Err(EngineError::InvalidSequence(format!(
                "sequence {:?} has no steps",
                self.id
            )));
        }
        let mut ids = std::collections::HashSet::new();
        for step in &self.steps {
            step.validate()?;
            if !ids.insert(step.id.as_str()) {
                return Err(EngineError::InvalidSequence(format!(
                    "sequence {:?} repeats step id {:?}",
                    self.id, step.id
                )));
            }
        }
        Ok(())
    }

    /// Number of transformations `L`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn default_xi() -> f64 {
    0.3
}
fn default_epsilon() -> f64 {
    0.15
}
fn default_f_scale() -> f64 {
    2.0
}
fn default_antipodal_eta() -> f64 {
    DEFAULT_ANTIPODAL_ETA
}

/// Every threshold a run depends on; recorded verbatim in reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Loop threshold on the semantic deficit.
    #[serde(default = "default_xi")]
    pub xi: f64,
    /// Reversibility threshold.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Coherence bound is `f_scale · epsilon`.
    #[serde(default = "default_f_scale")]
    pub f_scale: f64,
    /// Absolute zero tolerance for signatures; `None` means
    /// `1e-9 · max(1, max |ρ|)`.
    #[serde(default)]
    pub zero_tolerance: Option<f64>,
    #[serde(default = "default_antipodal_eta")]
    pub antipodal_eta: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            xi: default_xi(),
            epsilon: default_epsilon(),
            f_scale: default_f_scale(),
            zero_tolerance: None,
            antipodal_eta: default_antipodal_eta(),
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), EngineError> {
        let checks = [
            ("xi", Some(self.xi)),
            ("epsilon", Some(self.epsilon)),
            ("f_scale", Some(self.f_scale)),
            ("zero_tolerance", self.zero_tolerance),
            ("antipodal_eta", Some(self.antipodal_eta)),
        ];
        for (name, value) in checks {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(EngineError::InvalidThreshold(format!(
                        "{name} must be positive and finite, got {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn analysis_options(&self) -> AnalysisOptions {
        AnalysisOptions {
            xi: self.xi,
            zero_tolerance: self.zero_tolerance,
            antipodal_eta: self.antipodal_eta,
        }
    }
}
