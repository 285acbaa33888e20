//! Feature extraction for the two methods and labeled dataset assembly.
//!
//! * Baseline: counts of a small keyword set, one numeric attribute per
//!   keyword.
//! * ERRC: the document's ten most frequent stems as ten ordered nominal
//!   attributes `rank-1 .. rank-10`, padded with [`EMPTY_SLOT`].

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::textprep::{self, parse_word_lines, StopList, TermCounts, TextprepError};

/// Padding value for ERRC slots when a document has fewer distinct stems
/// than slots.
pub const EMPTY_SLOT: &str = "∅";

/// Default number of ERRC slots.
pub const ERRC_SLOTS: usize = 10;

/// Default keywords taken per conference by [`derive_keywords`].
pub const KEYWORDS_PER_SOURCE: usize = 5;

#[derive(Debug, Error)]
pub enum FeaturesError {
    #[error(transparent)]
    Text(#[from] TextprepError),
    #[error("keyword set is empty")]
    EmptyKeywords,
    #[error("conference {conference:?} has no terms in its latest year {year}")]
    NoTermsInLatestYear { conference: String, year: i32 },
    #[error("per-source keyword count must be positive")]
    ZeroPerSource,
    #[error("term counts do not line up with the corpus (expected {expected}, found {found})")]
    CountsMismatch { expected: String, found: String },
    #[error("the baseline method needs a keyword set")]
    MissingKeywords,
    #[error("unknown {kind} {value:?}")]
    Unknown { kind: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Re,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Baseline,
    Errc,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::Re, Task::Empirical];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Re => "re",
            Task::Empirical => "empirical",
        }
    }

    /// Human name used in tables.
    pub fn title(self) -> &'static str {
        match self {
            Task::Re => "Requirements",
            Task::Empirical => "Empirical",
        }
    }

    pub fn positive_name(self) -> &'static str {
        match self {
            Task::Re => "RE",
            Task::Empirical => "Empirical",
        }
    }
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Baseline, Method::Errc];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Errc => "errc",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = FeaturesError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "re" | "requirements" => Ok(Task::Re),
            "empirical" => Ok(Task::Empirical),
            _ => Err(FeaturesError::Unknown {
                kind: "task",
                value: s.to_string(),
            }),
        }
    }
}

impl FromStr for Method {
    type Err = FeaturesError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "baseline" => Ok(Method::Baseline),
            "errc" => Ok(Method::Errc),
            _ => Err(FeaturesError::Unknown {
                kind: "method",
                value: s.to_string(),
            }),
        }
    }
}

/// Binary class. `Positive` is "RE" or "Empirical" depending on the task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Positive,
    Negative,
}

impl Class {
    /// Positive first; this is also the tie-break order.
    pub const BOTH: [Class; 2] = [Class::Positive, Class::Negative];

    pub fn from_label(label: bool) -> Self {
        if label {
            Class::Positive
        } else {
            Class::Negative
        }
    }

    pub fn index(self) -> usize {
        match self {
            Class::Positive => 0,
            Class::Negative => 1,
        }
    }

    pub fn other(self) -> Class {
        match self {
            Class::Positive => Class::Negative,
            Class::Negative => Class::Positive,
        }
    }
}

/// Ordered list of stemmed keywords for the baseline method.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordSet {
    pub keywords: Vec<String>,
    pub provenance: String,
}

impl KeywordSet {
    /// Stems and deduplicates `words`, keeping first occurrences.
    pub fn new<I, S>(words: I, provenance: impl Into<String>) -> Result<Self, FeaturesError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        let mut keywords = Vec::new();
        for w in words {
            let norm = textprep::tokenize(&textprep::normalize(w.as_ref()));
            for token in norm {
                let s = textprep::stem(&token);
                if seen.insert(s.clone()) {
                    keywords.push(s);
                }
            }
        }
        if keywords.is_empty() {
            return Err(FeaturesError::EmptyKeywords);
        }
        Ok(KeywordSet {
            keywords,
            provenance: provenance.into(),
        })
    }

    /// Loads a keyword file (stop-list format). Entries are stemmed, so the
    /// file may contain surface forms like `requirements`.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, FeaturesError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| TextprepError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let words = parse_word_lines(&text)?;
        Self::new(words, format!("file {}", path.display()))
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }

    /// One keyword per line, with the provenance as a comment.
    pub fn to_file_string(&self) -> String {
        let mut s = format!("# {}\n", self.provenance);
        for k in &self.keywords {
            s.push_str(k);
            s.push('\n');
        }
        s
    }
}

/// Sorts `(stem, count)` pairs by count descending then stem ascending and
/// keeps the first `k`.
fn top_stems<'a>(
    counts: impl IntoIterator<Item = (&'a String, &'a u64)>,
    k: usize,
) -> Vec<&'a str> {
    let mut all: Vec<(&str, u64)> = counts.into_iter().map(|(s, c)| (s.as_str(), *c)).collect();
    all.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    all.into_iter().take(k).map(|(s, _)| s).collect()
}

/// Top `per_source` stems of each conference's most recent year, unioned in
/// (conference name, rank) order.
///
/// `counts` must be aligned with `corpus.documents`.
pub fn derive_keywords(
    corpus: &Corpus,
    counts: &[TermCounts],
    per_source: usize,
) -> Result<KeywordSet, FeaturesError> {
    if per_source == 0 {
        return Err(FeaturesError::ZeroPerSource);
    }
    check_alignment(corpus, counts)?;
    let mut latest: BTreeMap<&str, i32> = BTreeMap::new();
    for d in &corpus.documents {
        let y = latest.entry(&d.conference).or_insert(d.year);
        *y = (*y).max(d.year);
    }
    let mut keywords = Vec::new();
    let mut provenance = Vec::new();
    for (&conference, &year) in &latest {
        let mut summed: BTreeMap<String, u64> = BTreeMap::new();
        for (d, tc) in corpus.documents.iter().zip(counts) {
            if d.conference == conference && d.year == year {
                for (stem, n) in &tc.counts {
                    *summed.entry(stem.clone()).or_insert(0) += n;
                }
            }
        }
        if summed.is_empty() {
            return Err(FeaturesError::NoTermsInLatestYear {
                conference: conference.to_string(),
                year,
            });
        }
        for stem in top_stems(&summed, per_source) {
            if !keywords.iter().any(|k| k == stem) {
                keywords.push(stem.to_string());
            }
        }
        provenance.push(format!("{conference} {year}"));
    }
    Ok(KeywordSet {
        keywords,
        provenance: format!(
            "top {per_source} per conference from {}",
            provenance.join(", ")
        ),
    })
}

fn check_alignment(corpus: &Corpus, counts: &[TermCounts]) -> Result<(), FeaturesError> {
    if counts.len() != corpus.len() {
        return Err(FeaturesError::CountsMismatch {
            expected: format!("{} documents", corpus.len()),
            found: format!("{} term-count records", counts.len()),
        });
    }
    for (d, tc) in corpus.documents.iter().zip(counts) {
        if d.id != tc.doc_id {
            return Err(FeaturesError::CountsMismatch {
                expected: d.id.clone(),
                found: tc.doc_id.clone(),
            });
        }
    }
    Ok(())
}

/// Keyword counts aligned with a [`KeywordSet`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineVector {
    pub doc_id: String,
    pub counts: Vec<u64>,
}

pub fn baseline_features(tc: &TermCounts, ks: &KeywordSet) -> BaselineVector {
    BaselineVector {
        doc_id: tc.doc_id.clone(),
        counts: ks.keywords.iter().map(|k| tc.count(k)).collect(),
    }
}

/// A document's most frequent stems, rank 1 first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrcVector {
    pub doc_id: String,
    pub ranked_stems: Vec<String>,
}

impl ErrcVector {
    pub fn filled(&self) -> usize {
        self.ranked_stems
            .iter()
            .filter(|s| *s != EMPTY_SLOT)
            .count()
    }
}

pub fn errc_features(tc: &TermCounts, k: usize) -> ErrcVector {
    let mut ranked_stems: Vec<String> = top_stems(&tc.counts, k)
        .into_iter()
        .map(str::to_string)
        .collect();
    ranked_stems.resize(k, EMPTY_SLOT.to_string());
    ErrcVector {
        doc_id: tc.doc_id.clone(),
        ranked_stems,
    }
}

/// One attribute value. Baseline counts are numeric; ERRC slots nominal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Numeric(f64),
    Nominal(String),
}

impl Value {
    pub fn as_numeric(&self) -> Option<f64> {
        match self {
            Value::Numeric(x) => Some(*x),
            Value::Nominal(_) => None,
        }
    }

    pub fn as_nominal(&self) -> Option<&str> {
        match self {
            Value::Nominal(s) => Some(s),
            Value::Numeric(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Numeric,
    Nominal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

/// Ordered attribute list shared by every instance of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub attributes: Vec<Attribute>,
}

impl Schema {
    pub fn baseline(ks: &KeywordSet) -> Self {
        Schema {
            attributes: ks
                .keywords
                .iter()
                .map(|k| Attribute {
                    name: format!("kw:{k}"),
                    kind: AttributeKind::Numeric,
                })
                .collect(),
        }
    }

    pub fn errc(k: usize) -> Self {
        Schema {
            attributes: (1..=k)
                .map(|r| Attribute {
                    name: format!("rank-{r}"),
                    kind: AttributeKind::Nominal,
                })
                .collect(),
        }
    }

    pub fn nominal(names: &[&str]) -> Self {
        Schema {
            attributes: names
                .iter()
                .map(|n| Attribute {
                    name: n.to_string(),
                    kind: AttributeKind::Nominal,
                })
                .collect(),
        }
    }

    pub fn numeric(names: &[&str]) -> Self {
        Schema {
            attributes: names
                .iter()
                .map(|n| Attribute {
                    name: n.to_string(),
                    kind: AttributeKind::Numeric,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    /// True when `features` has one value of the right kind per attribute.
    pub fn matches(&self, features: &[Value]) -> bool {
        features.len() == self.attributes.len()
            && self.attributes.iter().zip(features).all(|(a, v)| {
                matches!(
                    (a.kind, v),
                    (AttributeKind::Numeric, Value::Numeric(_))
                        | (AttributeKind::Nominal, Value::Nominal(_))
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub doc_id: String,
    pub features: Vec<Value>,
    pub class: Class,
}

/// Labeled instances for one (task, method) pair, in corpus order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub task: Task,
    pub method: Method,
    pub schema: Schema,
    pub instances: Vec<Instance>,
    pub warnings: Vec<String>,
}

impl Dataset {
    /// Builds a dataset directly from rows; used for toy data and tests.
    pub fn from_rows(
        task: Task,
        method: Method,
        schema: Schema,
        rows: Vec<(Vec<Value>, Class)>,
    ) -> Self {
        let instances = rows
            .into_iter()
            .enumerate()
            .map(|(i, (features, class))| Instance {
                doc_id: format!("row{i}"),
                features,
                class,
            })
            .collect();
        let mut ds = Dataset {
            task,
            method,
            schema,
            instances,
            warnings: Vec::new(),
        };
        ds.warnings = ds.class_warnings();
        ds
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// `[positives, negatives]`.
    pub fn class_counts(&self) -> [usize; 2] {
        let mut c = [0, 0];
        for inst in &self.instances {
            c[inst.class.index()] += 1;
        }
        c
    }

    pub fn labels(&self) -> Vec<Class> {
        self.instances.iter().map(|i| i.class).collect()
    }

    /// At least two instances and both classes present.
    pub fn is_trainable(&self) -> bool {
        let [p, n] = self.class_counts();
        p > 0 && n > 0
    }

    /// The instances at `indices`, same task, method, and schema.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            task: self.task,
            method: self.method,
            schema: self.schema.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
            warnings: Vec::new(),
        }
    }

    fn class_warnings(&self) -> Vec<String> {
        let [p, n] = self.class_counts();
        if self.instances.len() < 2 || p == 0 || n == 0 {
            vec![format!(
                "{} dataset has {p} positive and {n} negative instances; classifiers need both classes",
                self.task
            )]
        } else {
            Vec::new()
        }
    }
}

/// Builds a dataset from precomputed term counts aligned with `corpus`.
pub fn dataset_from_counts(
    corpus: &Corpus,
    counts: &[TermCounts],
    method: Method,
    task: Task,
    ks: Option<&KeywordSet>,
) -> Result<Dataset, FeaturesError> {
    check_alignment(corpus, counts)?;
    let schema = match method {
        Method::Baseline => Schema::baseline(ks.ok_or(FeaturesError::MissingKeywords)?),
        Method::Errc => Schema::errc(ERRC_SLOTS),
    };
    let instances = corpus
        .documents
        .iter()
        .zip(counts)
        .map(|(d, tc)| {
            let features = match method {
                Method::Baseline => {
                    let ks = ks.expect("checked above");
                    baseline_features(tc, ks)
                        .counts
                        .into_iter()
                        .map(|c| Value::Numeric(c as f64))
                        .collect()
                }
                Method::Errc => errc_features(tc, ERRC_SLOTS)
                    .ranked_stems
                    .into_iter()
                    .map(Value::Nominal)
                    .collect(),
            };
            let label = match task {
                Task::Re => d.re_label,
                Task::Empirical => d.empirical_label,
            };
            Instance {
                doc_id: d.id.clone(),
                features,
                class: Class::from_label(label),
            }
        })
        .collect();
    let mut ds = Dataset {
        task,
        method,
        schema,
        instances,
        warnings: Vec::new(),
    };
    ds.warnings = ds.class_warnings();
    Ok(ds)
}

/// Reads and preprocesses every document, then builds the dataset.
pub fn build_dataset(
    corpus: &Corpus,
    method: Method,
    task: Task,
    stops: &StopList,
    ks: Option<&KeywordSet>,
) -> Result<Dataset, FeaturesError> {
    if method == Method::Baseline && ks.is_none() {
        return Err(FeaturesError::MissingKeywords);
    }
    let counts = corpus
        .documents
        .iter()
        .map(|d| textprep::term_counts(d, stops))
        .collect::<Result<Vec<_>, _>>()?;
    dataset_from_counts(corpus, &counts, method, task, ks)
}
