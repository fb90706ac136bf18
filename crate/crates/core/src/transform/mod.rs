//! Applying linguistic transformations to texts: deterministic mocks with
//! exact inverses, and provider-backed steps driven by a natural-language
//! instruction sent to a chat endpoint.

mod client;
mod mock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::http::HttpError;

pub use client::{ChatConfig, ChatTransformer, EchoTransformer};
pub use mock::{MockTransform, SubstitutionTable};

/// Default upper bound on transformed text length, in characters.
pub const DEFAULT_MAX_OUTPUT_CHARS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("invalid mock transform: {0}")]
    InvalidMock(String),
    #[error("step {0:?} declares no inverse")]
    MissingInverse(String),
    #[error("input text is empty")]
    EmptyInput,
    #[error("transformation produced empty output")]
    EmptyOutput,
    #[error("provider error: {0}")]
    Provider(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("invalid step: {0}")]
    InvalidStep(String),
}

impl From<HttpError> for TransformError {
    fn from(e: HttpError) -> Self {
        match e {
            HttpError::Auth(m) => TransformError::Auth(m),
            e => TransformError::Provider(e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// `instruction` is sent to a chat provider as the system message.
    ProviderPrompt,
    /// `instruction` names a [`MockTransform`], e.g. `caesar(3)`.
    Mock,
}

/// One transformation `U` of a sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformationStep {
    pub id: String,
    pub kind: StepKind,
    pub instruction: String,
    #[serde(default)]
    pub inverse_instruction: Option<String>,
}

impl TransformationStep {
    pub fn mock(id: impl Into<String>, transform: &MockTransform) -> Self {
        Self {
            id: id.into(),
            kind: StepKind::Mock,
            instruction: transform.to_string(),
            inverse_instruction: None,
        }
    }

    pub fn provider(
        id: impl Into<String>,
        instruction: impl Into<String>,
        inverse_instruction: Option<String>,
    ) -> Self {
        Self {
            id: id.into(),
            kind: StepKind::ProviderPrompt,
            instruction: instruction.into(),
            inverse_instruction,
        }
    }

    pub fn with_inverse(mut self, inverse_instruction: impl Into<String>) -> Self {
        self.inverse_instruction = Some(inverse_instruction.into());
        self
    }

    pub fn validate(&self) -> Result<(), TransformError> {
        if self.id.trim().is_empty() {
            return Err(TransformError::InvalidStep("step id is empty".into()));
        }
        if self.instruction.trim().is_empty() {
            return Err(TransformError::InvalidStep(format!(
                "step {:?} has an empty instruction",
                self.id
            )));
        }
        if self.kind == StepKind::Mock {
            self.mock_transform()?;
            if let Some(inv) = &self.inverse_instruction {
                inv.parse::<MockTransform>()?;
            }
        }
        Ok(())
    }

    pub fn mock_transform(&self) -> Result<MockTransform, TransformError> {
        self.instruction.parse()
    }
}

/// Sends an instruction plus a text to some rewriting service.
pub trait Transformer: Send + Sync {
    /// Identifies the backing model, for reports.
    fn fingerprint(&self) -> String;

    fn transform(&self, instruction: &str, text: &str) -> Result<String, TransformError>;
}

impl<T: Transformer + ?Sized> Transformer for &T {
    fn fingerprint(&self) -> String {
        (**self).fingerprint()
    }
    fn transform(&self, instruction: &str, text: &str) -> Result<String, TransformError> {
        (**self).transform(instruction, text)
    }
}

impl<T: Transformer + ?Sized> Transformer for Box<T> {
    fn fingerprint(&self) -> String {
        (**self).fingerprint()
    }
    fn transform(&self, instruction: &str, text: &str) -> Result<String, TransformError> {
        (**self).transform(instruction, text)
    }
}

impl<T: Transformer + ?Sized> Transformer for std::sync::Arc<T> {
    fn fingerprint(&self) -> String {
        (**self).fingerprint()
    }
    fn transform(&self, instruction: &str, text: &str) -> Result<String, TransformError> {
        (**self).transform(instruction, text)
    }
}

/// Applies `step` to `text`. Mock steps run locally; provider steps return the
/// provider's output verbatim.
pub fn apply_step(
    text: &str,
    step: &TransformationStep,
    provider: &dyn Transformer,
) -> Result<String, TransformError> {
    if text.is_empty() {
        return Err(TransformError::EmptyInput);
    }
    let out = match step.kind {
        StepKind::Mock => step.mock_transform()?.apply(text),
        StepKind::ProviderPrompt => provider.transform(&step.instruction, text)?,
    };
    if out.trim().is_empty() {
        return Err(TransformError::EmptyOutput);
    }
    Ok(out)
}

/// The declared inverse of `step`: its `inverse_instruction` if present,
/// otherwise the registered inverse for mock steps.
pub fn inverse_step(step: &TransformationStep) -> Result<TransformationStep, TransformError> {
    let instruction = match (&step.inverse_instruction, step.kind) {
        (Some(inv), _) => inv.clone(),
        (None, StepKind::Mock) => step.mock_transform()?.inverse().to_string(),
        (None, StepKind::ProviderPrompt) => return Err(TransformError::MissingInverse(step.id.clone())),
    };
    Ok(TransformationStep {
        id: format!("{}^-1", step.id),
        kind: step.kind,
        instruction,
        inverse_instruction: Some(step.instruction.clone()),
    })
}

/// Surrogate for membership in the linguistic space: non-empty text of
/// bounded length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureCheck {
    pub max_chars: usize,
}

impl Default for ClosureCheck {
    fn default() -> Self {
        Self {
            max_chars: DEFAULT_MAX_OUTPUT_CHARS,
        }
    }
}

impl ClosureCheck {
    pub fn accepts(&self, output: impl AsRef<[u8]>) -> bool {
        match std::str::from_utf8(output.as_ref()) {
            Ok(text) => !text.is_empty() && text.chars().count() <= self.max_chars,
            Err(_) => false,
        }
    }
}

/// [`ClosureCheck::accepts`] with the default bound.
pub fn closure_check(output: impl AsRef<[u8]>) -> bool {
    ClosureCheck::default().accepts(output)
}
