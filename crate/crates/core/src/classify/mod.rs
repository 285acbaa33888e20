//! ZeroR, naive Bayes, and a C4.5-style decision tree, all trained on a
//! [`Dataset`] and applied to feature vectors of the same [`Schema`].

mod naive_bayes;
mod tree;
mod zeror;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{Class, Dataset, Schema, Value};

pub use naive_bayes::{NaiveBayes, NbAttribute, VARIANCE_FLOOR};
pub use tree::{add_errors, gain_ratio, DecisionTree, Node, TreeParams};
pub use zeror::ZeroR;

/// Version written into serialized models.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("cannot train on an empty dataset")]
    EmptyDataset,
    #[error("training data has a single class ({positives} positive, {negatives} negative)")]
    SingleClass { positives: usize, negatives: usize },
    #[error("feature vector does not match the model schema ({expected} attributes expected, {found} given)")]
    SchemaMismatch { expected: usize, found: usize },
    #[error("unknown classifier {0:?}")]
    UnknownKind(String),
    #[error("model document: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    ZeroR,
    NaiveBayes,
    Tree,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::ZeroR, ModelKind::NaiveBayes, ModelKind::Tree];

    /// Short name used on the command line and in result files.
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::ZeroR => "zeror",
            ModelKind::NaiveBayes => "nb",
            ModelKind::Tree => "tree",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ModelKind::ZeroR => "ZeroR",
            ModelKind::NaiveBayes => "Naive Bayes",
            ModelKind::Tree => "Decision tree",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = ClassifyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zeror" => Ok(ModelKind::ZeroR),
            "nb" | "naive_bayes" | "naivebayes" => Ok(ModelKind::NaiveBayes),
            "tree" | "j48" | "c45" => Ok(ModelKind::Tree),
            _ => Err(ClassifyError::UnknownKind(s.to_string())),
        }
    }
}

/// A predicted class with per-class scores summing to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Class,
    /// Indexed by [`Class::index`]: `[positive, negative]`.
    pub scores: [f64; 2],
}

impl Prediction {
    /// Argmax of `scores`, ties going to the positive class.
    pub fn from_scores(scores: [f64; 2]) -> Self {
        let label = if scores[0] >= scores[1] {
            Class::Positive
        } else {
            Class::Negative
        };
        Prediction { label, scores }
    }

    pub fn one_hot(label: Class) -> Self {
        let mut scores = [0.0; 2];
        scores[label.index()] = 1.0;
        Prediction { label, scores }
    }

    pub fn score(&self, class: Class) -> f64 {
        self.scores[class.index()]
    }
}

/// A trained classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    ZeroR(ZeroR),
    NaiveBayes(NaiveBayes),
    Tree(DecisionTree),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::ZeroR(_) => ModelKind::ZeroR,
            Model::NaiveBayes(_) => ModelKind::NaiveBayes,
            Model::Tree(_) => ModelKind::Tree,
        }
    }

    pub fn schema(&self) -> &Schema {
        match self {
            Model::ZeroR(m) => &m.schema,
            Model::NaiveBayes(m) => &m.schema,
            Model::Tree(m) => &m.schema,
        }
    }

    pub fn predict(&self, features: &[Value]) -> Result<Prediction, ClassifyError> {
        let schema = self.schema();
        if !schema.matches(features) {
            return Err(ClassifyError::SchemaMismatch {
                expected: schema.len(),
                found: features.len(),
            });
        }
        Ok(match self {
            Model::ZeroR(m) => m.predict(),
            Model::NaiveBayes(m) => m.predict_unchecked(features),
            Model::Tree(m) => m.predict_unchecked(features),
        })
    }
}

pub fn train(kind: ModelKind, ds: &Dataset) -> Result<Model, ClassifyError> {
    Ok(match kind {
        ModelKind::ZeroR => Model::ZeroR(train_zeror(ds)?),
        ModelKind::NaiveBayes => Model::NaiveBayes(train_naive_bayes(ds)?),
        ModelKind::Tree => Model::Tree(train_tree(ds)?),
    })
}

pub fn train_zeror(ds: &Dataset) -> Result<ZeroR, ClassifyError> {
    ZeroR::train(ds)
}

pub fn train_naive_bayes(ds: &Dataset) -> Result<NaiveBayes, ClassifyError> {
    NaiveBayes::train(ds)
}

pub fn train_tree(ds: &Dataset) -> Result<DecisionTree, ClassifyError> {
    DecisionTree::train(ds, &TreeParams::default())
}

pub fn predict(model: &Model, features: &[Value]) -> Result<Prediction, ClassifyError> {
    model.predict(features)
}

fn require_both_classes(ds: &Dataset) -> Result<[usize; 2], ClassifyError> {
    if ds.is_empty() {
        return Err(ClassifyError::EmptyDataset);
    }
    let [p, n] = ds.class_counts();
    if p == 0 || n == 0 {
        return Err(ClassifyError::SingleClass {
            positives: p,
            negatives: n,
        });
    }
    Ok([p, n])
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    model: Model,
}

const FORMAT_NAME: &str = "errc-model";

/// Serializes a model as a self-describing versioned JSON document.
pub fn model_to_json(model: &Model) -> String {
    serde_json::to_string_pretty(&ModelDocument {
        format: FORMAT_NAME.into(),
        version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    })
    .expect("models contain only finite numbers and strings")
}

pub fn model_from_json(json: &str) -> Result<Model, ClassifyError> {
    let doc: ModelDocument =
        serde_json::from_str(json).map_err(|e| ClassifyError::Format(e.to_string()))?;
    if doc.format != FORMAT_NAME {
        return Err(ClassifyError::Format(format!(
            "unexpected format {:?}",
            doc.format
        )));
    }
    if doc.version != MODEL_FORMAT_VERSION {
        return Err(ClassifyError::Format(format!(
            "unsupported version {} (expected {MODEL_FORMAT_VERSION})",
            doc.version
        )));
    }
    Ok(doc.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{Method, Task};

    fn nominal(v: &str) -> Value {
        Value::Nominal(v.into())
    }

    fn toy() -> Dataset {
        Dataset::from_rows(
            Task::Re,
            Method::Errc,
            Schema::nominal(&["x", "y"]),
            vec![
                (vec![nominal("a"), nominal("p")], Class::Positive),
                (vec![nominal("a"), nominal("q")], Class::Positive),
                (vec![nominal("b"), nominal("q")], Class::Negative),
                (vec![nominal("b"), nominal("p")], Class::Negative),
                (vec![nominal("a"), nominal("q")], Class::Negative),
            ],
        )
    }

    #[test]
    fn json_round_trip_preserves_predictions() {
        let ds = toy();
        let probes = [
            vec![nominal("a"), nominal("p")],
            vec![nominal("b"), nominal("zz")],
            vec![nominal("c"), nominal("q")],
        ];
        for kind in ModelKind::ALL {
            let m = train(kind, &ds).unwrap();
            let back = model_from_json(&model_to_json(&m)).unwrap();
            assert_eq!(back, m);
            for p in &probes {
                let a = m.predict(p).unwrap();
                let b = back.predict(p).unwrap();
                assert_eq!(a.label, b.label);
                assert_eq!(a.scores[0].to_bits(), b.scores[0].to_bits());
            }
        }
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let m = train(ModelKind::NaiveBayes, &toy()).unwrap();
        assert!(matches!(
            m.predict(&[nominal("a")]),
            Err(ClassifyError::SchemaMismatch {
                expected: 2,
                found: 1
            })
        ));
        assert!(matches!(
            m.predict(&[nominal("a"), Value::Numeric(1.0)]),
            Err(ClassifyError::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(model_from_json("{}").is_err());
        let json = model_to_json(&train(ModelKind::ZeroR, &toy()).unwrap());
        let bumped = json.replace("\"version\": 1", "\"version\": 99");
        assert!(matches!(
            model_from_json(&bumped),
            Err(ClassifyError::Format(_))
        ));
    }

    #[test]
    fn tie_goes_to_positive() {
        assert_eq!(Prediction::from_scores([0.5, 0.5]).label, Class::Positive);
        assert_eq!(Prediction::from_scores([0.2, 0.8]).label, Class::Negative);
    }
}
