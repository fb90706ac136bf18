use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::embedding::ProviderConfig;
use crate::engine::{CorpusElement, SequenceSpec, Thresholds};
use crate::transform::{ChatConfig, StepKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "provider", rename_all = "snake_case")]
pub enum EmbeddingSection {
    Mock { dim: usize },
    Http(ProviderConfig),
}

impl EmbeddingSection {
    pub fn dim(&self) -> usize {
        match self {
            EmbeddingSection::Mock { dim } => *dim,
            EmbeddingSection::Http(c) => c.expected_dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "provider", rename_all = "snake_case")]
pub enum TransformSection {
    /// Provider steps return their input unchanged.
    Echo,
    Http(ChatConfig),
}

fn default_parallelism() -> usize {
    1
}

/// The TOML run configuration. Relative paths are resolved against the
/// directory holding the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Plain text (one element per non-blank line) or `.jsonl` of `{id, text}`.
    pub corpus: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub thresholds: Thresholds,
    pub embedding: Option<EmbeddingSection>,
    pub transform: Option<TransformSection>,
    #[serde(default)]
    pub sequences: Vec<SequenceSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            cache_dir: None,
            out: None,
            parallelism: default_parallelism(),
            seed: 0,
            thresholds: Thresholds::default(),
            embedding: None,
            transform: None,
            sequences: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config =
            Self::from_toml_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut config.corpus, &mut config.cache_dir, &mut config.out]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.thresholds
            .validate()
            .map_err(|e| CliError::Config(format!("thresholds: {e}")))?;
        if self.parallelism == 0 {
            return bad("parallelism must be positive".into());
        }
        match &self.embedding {
            Some(EmbeddingSection::Mock { dim }) if *dim < 2 => {
                return bad(format!("embedding.dim must be at least 2, got {dim}"));
            }
            Some(EmbeddingSection::Http(c)) => {
                c.validate()
                    .map_err(|e| CliError::Config(format!("embedding: {e}")))?;
            }
            _ => {}
        }
        if let Some(TransformSection::Http(c)) = &self.transform {
            c.validate()
                .map_err(|e| CliError::Config(format!("transform: {e}")))?;
        }
        let mut ids = std::collections::HashSet::new();
        for (i, seq) in self.sequences.iter().enumerate() {
            seq.validate()
                .map_err(|e| CliError::Config(format!("sequences[{i}]: {e}")))?;
            if !ids.insert(seq.id.as_str()) {
                return bad(format!("sequences[{i}]: duplicate id {:?}", seq.id));
            }
        }
        Ok(())
    }

    pub fn embedding(&self) -> Result<&EmbeddingSection, CliError> {
        self.embedding
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [embedding] section".into()))
    }

    /// Whether any configured step needs a chat provider.
    pub fn uses_provider_steps(&self) -> bool {
        self.sequences
            .iter()
            .flat_map(|s| &s.steps)
            .any(|s| s.kind == StepKind::ProviderPrompt)
    }

    pub fn sequence(&self, id: &str) -> Result<&SequenceSpec, CliError> {
        self.sequences
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| CliError::Config(format!("no sequence with id {id:?}")))
    }

    pub fn load_corpus(&self) -> Result<Vec<CorpusElement>, CliError> {
        let path = self
            .corpus
            .as_ref()
            .ok_or_else(|| CliError::Config("config sets no corpus".into()))?;
        load_corpus(path)
    }
}

pub fn load_corpus(path: &Path) -> Result<Vec<CorpusElement>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read corpus {}: {e}", path.display())))?;
    let elements = if path.extension().is_some_and(|e| e == "jsonl") {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str::<CorpusElement>(l)
                    .map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), i + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?
    } else {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        CorpusElement::from_texts(&lines)
    };
    if elements.is_empty() {
        return Err(CliError::Config(format!("corpus {} is empty", path.display())));
    }
    let mut ids = std::collections::HashSet::new();
    for e in &elements {
        if e.text.is_empty() {
            return Err(CliError::Config(format!("corpus element {:?} is empty", e.id)));
        }
        if !ids.insert(e.id.as_str()) {
            return Err(CliError::Config(format!("corpus repeats id {:?}", e.id)));
        }
    }
    Ok(elements)
}
