use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::TextprepError;

/// The default English stop list, one entry per line.
pub const BUILTIN_STOPWORDS: &str = include_str!("stopwords_en.txt");

/// Where a [`StopList`] came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopListSource {
    Builtin,
    File(PathBuf),
}

impl fmt::Display for StopListSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopListSource::Builtin => f.write_str("builtin"),
            StopListSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// A set of lowercase tokens removed before stemming.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopList {
    entries: BTreeSet<String>,
    source: StopListSource,
}

impl StopList {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_STOPWORDS, StopListSource::Builtin)
            .expect("builtin stop list is well formed")
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, TextprepError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| TextprepError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, StopListSource::File(path.to_path_buf()))
    }

    /// Parses the line format: one token per line, `#` comment lines and
    /// blank lines ignored. Entries are lowercased.
    pub fn parse(text: &str, source: StopListSource) -> Result<Self, TextprepError> {
        let entries = parse_word_lines(text)?;
        if entries.is_empty() {
            return Err(TextprepError::EmptyStopList(source.to_string()));
        }
        Ok(StopList {
            entries: entries.into_iter().collect(),
            source,
        })
    }

    /// Builds a list from explicit entries (lowercased).
    pub fn from_words<I, S>(words: I) -> Result<Self, TextprepError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let joined: Vec<String> = words.into_iter().map(|w| w.as_ref().to_string()).collect();
        Self::parse(&joined.join("\n"), StopListSource::Builtin)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }

    pub fn source(&self) -> &StopListSource {
        &self.source
    }

    /// A copy without `word`.
    pub fn without(&self, word: &str) -> StopList {
        let mut entries = self.entries.clone();
        entries.remove(word);
        StopList {
            entries,
            source: self.source.clone(),
        }
    }
}

/// Shared reader for the one-word-per-line format used by stop lists and
/// keyword files.
pub(crate) fn parse_word_lines(text: &str) -> Result<Vec<String>, TextprepError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.chars().any(char::is_whitespace) {
            return Err(TextprepError::BadListEntry {
                line: idx + 1,
                entry: line.to_string(),
            });
        }
        out.push(line.to_lowercase());
    }
    Ok(out)
}
