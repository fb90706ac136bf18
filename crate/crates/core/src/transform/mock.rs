use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::TransformError;

/// A bijective word-for-word replacement table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstitutionTable(BTreeMap<String, String>);

impl SubstitutionTable {
    /// Rejects tables that map two words to the same replacement, empty
    /// words, and words containing spaces.
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Result<Self, TransformError> {
        let mut forward = BTreeMap::new();
        let mut seen_values = BTreeMap::new();
        for (from, to) in pairs {
            if from.is_empty() || to.is_empty() || from.contains(' ') || to.contains(' ') {
                return Err(TransformError::InvalidMock(format!(
                    "substitution words must be non-empty and space-free: {from:?} -> {to:?}"
                )));
            }
            if let Some(prev) = seen_values.insert(to.clone(), from.clone()) {
                return Err(TransformError::InvalidMock(format!(
                    "substitution table is not bijective: {prev:?} and {from:?} both map to {to:?}"
                )));
            }
            if forward.insert(from.clone(), to).is_some() {
                return Err(TransformError::InvalidMock(format!(
                    "substitution table lists {from:?} twice"
                )));
            }
        }
        Ok(Self(forward))
    }

    pub fn inverted(&self) -> Self {
        Self(self.0.iter().map(|(k, v)| (v.clone(), k.clone())).collect())
    }

    fn apply(&self, text: &str) -> String {
        text.split(' ')
            .map(|w| self.0.get(w).map(String::as_str).unwrap_or(w))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Words that appear as replacements but not as sources; a text containing
    /// one of them cannot be inverted exactly.
    fn image_only_words(&self) -> impl Iterator<Item = &str> {
        self.0
            .values()
            .filter(|v| !self.0.contains_key(*v))
            .map(String::as_str)
    }
}

/// Deterministic transformations with exact inverses, for hermetic runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MockTransform {
    Identity,
    Uppercase,
    Lowercase,
    ReverseWords,
    /// Shifts ASCII letters by `k` places, preserving case.
    Caesar(u8),
    WordSubstitution(SubstitutionTable),
}

impl MockTransform {
    pub fn apply(&self, text: &str) -> String {
        match self {
            MockTransform::Identity => text.to_string(),
            MockTransform::Uppercase => text.to_uppercase(),
            MockTransform::Lowercase => text.to_lowercase(),
            MockTransform::ReverseWords => text.split(' ').rev().collect::<Vec<_>>().join(" "),
            MockTransform::Caesar(k) => text.chars().map(|c| caesar_shift(c, *k)).collect(),
            MockTransform::WordSubstitution(table) => table.apply(text),
        }
    }

    /// The registered exact inverse.
    pub fn inverse(&self) -> MockTransform {
        match self {
            MockTransform::Identity => MockTransform::Identity,
            MockTransform::Uppercase => MockTransform::Lowercase,
            MockTransform::Lowercase => MockTransform::Uppercase,
            MockTransform::ReverseWords => MockTransform::ReverseWords,
            MockTransform::Caesar(k) => MockTransform::Caesar((26 - k % 26) % 26),
            MockTransform::WordSubstitution(t) => MockTransform::WordSubstitution(t.inverted()),
        }
    }

    /// Whether `inverse(apply(text)) == text` is guaranteed for `text`.
    pub fn in_domain(&self, text: &str) -> bool {
        match self {
            MockTransform::Identity | MockTransform::Caesar(_) | MockTransform::ReverseWords => true,
            MockTransform::Uppercase => !text.chars().any(|c| c.is_uppercase()) && text.is_ascii(),
            MockTransform::Lowercase => !text.chars().any(|c| c.is_lowercase()) && text.is_ascii(),
            MockTransform::WordSubstitution(t) => {
                let blocked: Vec<&str> = t.image_only_words().collect();
                !text.split(' ').any(|w| blocked.contains(&w))
            }
        }
    }
}

fn caesar_shift(c: char, k: u8) -> char {
    let k = k % 26;
    let base = match c {
        'a'..='z' => b'a',
        'A'..='Z' => b'A',
        _ => return c,
    };
    (base + (c as u8 - base + k) % 26) as char
}

impl fmt::Display for MockTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MockTransform::Identity => write!(f, "identity"),
            MockTransform::Uppercase => write!(f, "uppercase"),
            MockTransform::Lowercase => write!(f, "lowercase"),
            MockTransform::ReverseWords => write!(f, "reverse_words"),
            MockTransform::Caesar(k) => write!(f, "caesar({k})"),
            MockTransform::WordSubstitution(t) => {
                let pairs: Vec<String> = t.0.iter().map(|(a, b)| format!("{a}:{b}")).collect();
                write!(f, "word_substitution({})", pairs.join(","))
            }
        }
    }
}

/// Parses `identity`, `uppercase`, `lowercase`, `reverse_words`, `caesar(k)`
/// and `word_substitution(from:to,from:to,…)`.
impl FromStr for MockTransform {
    type Err = TransformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || TransformError::InvalidMock(format!("unknown mock transform {s:?}"));
        let (name, arg) = match s.find('(') {
            Some(open) => {
                let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
                (&s[..open], Some(inner))
            }
            None => (s, None),
        };
        match (name, arg) {
            ("identity", None) => Ok(MockTransform::Identity),
            ("uppercase", None) => Ok(MockTransform::Uppercase),
            ("lowercase", None) => Ok(MockTransform::Lowercase),
            ("reverse_words", None) => Ok(MockTransform::ReverseWords),
            ("caesar", Some(k)) => {
                let k: i64 = k.trim().parse().map_err(|_| bad())?;
                Ok(MockTransform::Caesar(k.rem_euclid(26) as u8))
            }
            ("word_substitution", Some(table)) => {
                let pairs = table
                    .split(',')
                    .filter(|p| !p.trim().is_empty())
                    .map(|p| {
                        let (a, b) = p.split_once(':').ok_or_else(bad)?;
                        Ok((a.trim().to_string(), b.trim().to_string()))
                    })
                    .collect::<Result<Vec<_>, TransformError>>()?;
                Ok(MockTransform::WordSubstitution(SubstitutionTable::new(pairs)?))
            }
            _ => Err(bad()),
        }
    }
}
