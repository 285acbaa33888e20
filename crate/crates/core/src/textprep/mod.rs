//! Text normalization, tokenization, stop-word filtering, stemming, and
//! per-document stem counts.
//!
//! The pipeline is `normalize -> tokenize -> remove_stopwords -> stem`,
//! followed by a frequency count of the resulting stems:
//!
//! ```
//! use errc::textprep::{term_counts_for_text, StopList};
//!
//! let tc = term_counts_for_text("doc", "The required requirements,\nrequiring 3 reviews.", &StopList::builtin());
//! assert_eq!(tc.count("requir"), 3);
//! assert_eq!(tc.count("review"), 1);
//! assert_eq!(tc.total_tokens, 5);
//! ```

mod porter;
mod stoplist;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;

pub use porter::stem;
pub(crate) use stoplist::parse_word_lines;
pub use stoplist::{StopList, StopListSource, BUILTIN_STOPWORDS};

#[derive(Debug, Error)]
pub enum TextprepError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("document {id}: cannot read {path}: {source}")]
    Document {
        id: String,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("stop list {0} has no entries")]
    EmptyStopList(String),
    #[error("line {line}: entry {entry:?} contains whitespace")]
    BadListEntry { line: usize, entry: String },
}

/// Replaces newlines and punctuation (except `'` and `-`) with spaces,
/// deletes ASCII digits, and lowercases.
///
/// Non-ASCII characters are kept only when they are lowercase letters after
/// case folding; everything else non-ASCII becomes a space.
pub fn normalize(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        for lc in c.to_lowercase() {
            match lc {
                '\n' | '\r' => out.push(' '),
                '0'..='9' => {}
                '\'' | '-' => out.push(lc),
                c if c.is_ascii_punctuation() => out.push(' '),
                c if c.is_ascii() => out.push(c),
                c if c.is_alphabetic() && is_fixed_lowercase(c) => out.push(c),
                _ => out.push(' '),
            }
        }
    }
    out
}

fn is_fixed_lowercase(c: char) -> bool {
    let mut lower = c.to_lowercase();
    lower.next() == Some(c) && lower.next().is_none()
}

/// Splits on whitespace and trims leading/trailing apostrophes and dashes.
pub fn tokenize(normalized: &str) -> Vec<String> {
    normalized
        .split_whitespace()
        .map(|t| t.trim_matches(|c| c == '\'' || c == '-'))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn remove_stopwords(tokens: Vec<String>, stops: &StopList) -> Vec<String> {
    tokens.into_iter().filter(|t| !stops.contains(t)).collect()
}

/// Stem frequencies for one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermCounts {
    pub doc_id: String,
    pub counts: BTreeMap<String, u64>,
    /// Tokens produced by tokenization, before stop-word removal.
    pub total_tokens: u64,
}

impl TermCounts {
    pub fn empty(doc_id: impl Into<String>) -> Self {
        TermCounts {
            doc_id: doc_id.into(),
            counts: BTreeMap::new(),
            total_tokens: 0,
        }
    }

    pub fn count(&self, stem: &str) -> u64 {
        self.counts.get(stem).copied().unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn sum(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Runs the whole pipeline over an in-memory text.
pub fn term_counts_for_text(doc_id: &str, text: &str, stops: &StopList) -> TermCounts {
    let tokens = tokenize(&normalize(text));
    let total_tokens = tokens.len() as u64;
    let mut counts = BTreeMap::new();
    for token in remove_stopwords(tokens, stops) {
        *counts.entry(stem(&token)).or_insert(0) += 1;
    }
    TermCounts {
        doc_id: doc_id.to_string(),
        counts,
        total_tokens,
    }
}

/// Reads a document's text from disk and counts its stems.
pub fn term_counts(doc: &Document, stops: &StopList) -> Result<TermCounts, TextprepError> {
    let text = std::fs::read_to_string(&doc.path).map_err(|source| TextprepError::Document {
        id: doc.id.clone(),
        path: doc.path.clone(),
        source,
    })?;
    Ok(term_counts_for_text(&doc.id, &text, stops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("don't re-use\nmodel 42"), "don't re-use model ");
        assert_eq!(normalize(""), "");
        assert_eq!(normalize("A,B;C"), "a b c");
        assert_eq!(normalize("sha1"), "sha");
        assert_eq!(normalize("line\r\nnext"), "line  next");
        assert_eq!(normalize("naïve “quoted”"), "naïve  quoted ");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("a b  c"), vec!["a", "b", "c"]);
        assert_eq!(tokenize("'quoted' word"), vec!["quoted", "word"]);
        assert_eq!(tokenize("state-of-the-art"), vec!["state-of-the-art"]);
        assert_eq!(tokenize(" -- ' "), Vec::<String>::new());
    }

    #[test]
    fn stopword_filter() {
        let stops = StopList::from_words(["the", "and"]).unwrap();
        let toks = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(
            remove_stopwords(toks(&["the", "empirical", "and", "study"]), &stops),
            toks(&["empirical", "study"])
        );
        assert!(remove_stopwords(vec![], &stops).is_empty());
        assert_eq!(
            remove_stopwords(toks(&["empirical", "study"]), &stops),
            toks(&["empirical", "study"])
        );
    }

    #[test]
    fn term_count_examples() {
        let stops = StopList::builtin();
        let tc = term_counts_for_text("d", "required requirements requiring", &stops);
        assert_eq!(tc.counts, BTreeMap::from([("requir".to_string(), 3)]));

        let tc = term_counts_for_text("d", "", &stops);
        assert!(tc.counts.is_empty());
        assert_eq!(tc.total_tokens, 0);

        // Hand trace: normalize leaves the text unchanged, tokenize yields
        // three tokens, none are stop words, and both stems are fixed points
        // of the stemmer.
        let tc = term_counts_for_text("d", "alpha beta alpha", &stops);
        assert_eq!(
            tc.counts,
            BTreeMap::from([("alpha".to_string(), 2), ("beta".to_string(), 1)])
        );
        assert_eq!(tc.sum(), 3);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in any::<String>()) {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once);
        }

        #[test]
        fn tokens_are_clean(s in "[ -~\\n\\r\\tàéü“”]{0,80}") {
            for t in tokenize(&normalize(&s)) {
                prop_assert!(!t.chars().any(|c| c.is_whitespace() || c.is_ascii_digit()));
                prop_assert!(!t.starts_with(['\'', '-']) && !t.ends_with(['\'', '-']));
                prop_assert!(t.chars().all(|c| c.is_alphabetic() || c == '\'' || c == '-'));
            }
        }

        #[test]
        fn dropping_a_stop_word_never_lowers_counts(
            words in proptest::collection::vec(prop_oneof![
                Just("the"), Just("and"), Just("of"), Just("requirements"),
                Just("testing"), Just("study"), Just("an"),
            ], 0..40),
            drop in prop_oneof![Just("the"), Just("and"), Just("of"), Just("an")],
        ) {
            let text = words.join(" ");
            let full = StopList::builtin();
            let fewer = full.without(drop);
            let a = term_counts_for_text("d", &text, &full);
            let b = term_counts_for_text("d", &text, &fewer);
            for (stem, n) in &a.counts {
                prop_assert!(b.count(stem) >= *n);
            }
            prop_assert!(a.sum() <= a.total_tokens);
            prop_assert_eq!(term_counts_for_text("d", &text, &full), a);
        }
    }
}
