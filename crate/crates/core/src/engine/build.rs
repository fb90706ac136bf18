use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EngineError, SequenceSpec, Trajectory};
use crate::embedding::Embedder;
use crate::transform::{apply_step, ClosureCheck, Transformer};

/// One sampled element `λ` of the corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusElement {
    pub id: String,
    pub text: String,
}

impl CorpusElement {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
        }
    }

    /// Ids are zero-padded line indices so lexical and corpus order agree.
    pub fn from_texts<S: AsRef<str>>(texts: &[S]) -> Vec<Self> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Self::new(format!("el-{i:05}"), t.as_ref()))
            .collect()
    }
}

/// The providers and limits a run works with.
pub struct Pipeline<'a> {
    pub transformer: &'a dyn Transformer,
    pub embedder: &'a dyn Embedder,
    pub closure: ClosureCheck,
    /// Upper bound on elements processed concurrently.
    pub parallelism: usize,
}

impl<'a> Pipeline<'a> {
    pub fn new(transformer: &'a dyn Transformer, embedder: &'a dyn Embedder) -> Self {
        Self {
            transformer,
            embedder,
            closure: ClosureCheck::default(),
            parallelism: 1,
        }
    }

    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism.max(1);
        self
    }

    /// Applies the steps of `spec` in order, each to the previous output, then
    /// embeds all `L + 1` texts. Any failure discards the whole trajectory.
    pub fn build_trajectory(
        &self,
        element: &CorpusElement,
        spec: &SequenceSpec,
    ) -> Result<Trajectory, EngineError> {
        if element.text.is_empty() {
            return Err(EngineError::EmptyElement);
        }
        spec.validate()?;
        let mut texts = Vec::with_capacity(spec.len() + 1);
        texts.push(element.text.clone());
        for (i, step) in spec.steps.iter().enumerate() {
            let previous = texts.last().expect("texts starts non-empty");
            let next =
                apply_step(previous, step, self.transformer).map_err(|cause| EngineError::Provider {
                    step: step.id.clone(),
                    index: i + 1,
                    cause,
                })?;
            if !self.closure.accepts(&next) {
                return Err(EngineError::Closure {
                    step: step.id.clone(),
                    index: i + 1,
                });
            }
            texts.push(next);
        }
        let vectors = self.embedder.embed_batch(&texts)?;
        Ok(Trajectory::new(
            element.id.clone(),
            texts,
            vectors,
            spec.id.clone(),
            self.embedder.fingerprint(),
        )?)
    }

    /// One result per element, in input order.
    pub fn build_trajectories(
        &self,
        elements: &[CorpusElement],
        spec: &SequenceSpec,
    ) -> Vec<Result<Trajectory, EngineError>> {
        self.map_elements(elements, |e| self.build_trajectory(e, spec))
    }

    pub(crate) fn map_elements<T: Sync, R: Send>(
        &self,
        items: &[T],
        f: impl Fn(&T) -> R + Sync + Send,
    ) -> Vec<R> {
        if self.parallelism <= 1 || items.len() <= 1 {
            return items.iter().map(f).collect();
        }
        match rayon::ThreadPoolBuilder::new()
            .num_threads(self.parallelism)
            .build()
        {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(e) => {
                tracing::warn!(error = %e, "could not start worker pool, running sequentially");
                items.iter().map(f).collect()
            }
        }
    }
}

/// [`Pipeline::build_trajectory`] with the default closure bound.
pub fn build_trajectory(
    element: &CorpusElement,
    spec: &SequenceSpec,
    transformer: &dyn Transformer,
    embedder: &dyn Embedder,
) -> Result<Trajectory, EngineError> {
    Pipeline::new(transformer, embedder).build_trajectory(element, spec)
}
