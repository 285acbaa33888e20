//! Repeated stratified k-fold cross-validation and the four evaluation
//! measures.
//!
//! Each (seed, k) run pools the predictions of all k held-out folds into one
//! confusion matrix, and the measures are computed from that matrix:
//!
//! ```
//! use errc::eval::{metrics, ConfusionMatrix};
//!
//! let m = metrics(&ConfusionMatrix { tp: 3, fp: 1, fn_: 2, tn: 4 }).unwrap();
//! assert_eq!(m.accuracy, 0.7);
//! assert_eq!(m.precision, 0.75);
//! assert_eq!(m.recall, 0.6);
//! assert!((m.f_measure - 2.0 / 3.0).abs() < 1e-15);
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{self, ClassifyError, ModelKind};
use crate::features::{Class, Dataset, Method, Task};

/// Column order of `results.csv`.
pub const RESULTS_HEADER: [&str; 13] = [
    "method",
    "task",
    "classifier",
    "folds",
    "seed",
    "tp",
    "fp",
    "fn",
    "tn",
    "accuracy",
    "precision",
    "recall",
    "f_measure",
];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("fold count {k} must be at least 2")]
    TooFewFolds { k: usize },
    #[error("fold count {k} exceeds instance count {n}")]
    TooManyFolds { k: usize, n: usize },
    #[error("seed {seed}, fold {fold}: {source}")]
    Training {
        seed: u64,
        fold: usize,
        #[source]
        source: ClassifyError,
    },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("no run results to aggregate")]
    NoResults,
    #[error("cannot aggregate runs from different configurations ({0})")]
    MixedConfigurations(String),
    #[error("results file: {0}")]
    ResultsFile(String),
    #[error("no seeds given")]
    NoSeeds,
}

/// Assignment of instance indices to folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
    /// `assignment[i]` is the fold holding instance `i` out.
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    /// Test indices per fold, ascending within each fold.
    pub fn folds(&self) -> Vec<Vec<usize>> {
        let mut folds = vec![Vec::new(); self.k];
        for (i, &f) in self.assignment.iter().enumerate() {
            folds[f].push(i);
        }
        folds
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        self.folds().iter().map(Vec::len).collect()
    }
}

/// Seeded fold assignment. With `stratify`, each class is shuffled
/// separately and dealt round-robin, positives first, with the fold counter
/// carried over between classes; otherwise all indices are shuffled and
/// dealt together.
pub fn make_folds(
    labels: &[Class],
    k: usize,
    seed: u64,
    stratify: bool,
) -> Result<FoldPlan, EvalError> {
    let n = labels.len();
    if k < 2 {
        return Err(EvalError::TooFewFolds { k });
    }
    if k > n {
        return Err(EvalError::TooManyFolds { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<Vec<usize>> = if stratify {
        Class::BOTH
            .iter()
            .map(|c| (0..n).filter(|&i| labels[i] == *c).collect())
            .collect()
    } else {
        vec![(0..n).collect()]
    };
    let mut assignment = vec![0; n];
    let mut next = 0;
    for mut group in groups {
        group.shuffle(&mut rng);
        for i in group {
            assignment[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan {
        n,
        k,
        seed,
        stratified: stratify,
        assignment,
    })
}

/// Counts for the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, actual: Class, predicted: Class) {
        match (actual, predicted) {
            (Class::Positive, Class::Positive) => self.tp += 1,
            (Class::Negative, Class::Positive) => self.fp += 1,
            (Class::Positive, Class::Negative) => self.fn_ += 1,
            (Class::Negative, Class::Negative) => self.tn += 1,
        }
    }

    /// The same predictions scored with the negative class as positive.
    pub fn swapped(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    Precision,
    Recall,
    FMeasure,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::Accuracy,
        Metric::Precision,
        Metric::Recall,
        Metric::FMeasure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::FMeasure => "f_measure",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Metric::Accuracy => "Accuracy",
            Metric::Precision => "Precision",
            Metric::Recall => "Recall",
            Metric::FMeasure => "F-Measure",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = EvalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| EvalError::ResultsFile(format!("unknown metric {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl Metrics {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Accuracy => self.accuracy,
            Metric::Precision => self.precision,
            Metric::Recall => self.recall,
            Metric::FMeasure => self.f_measure,
        }
    }

    fn from_fn(mut f: impl FnMut(Metric) -> f64) -> Self {
        Metrics {
            accuracy: f(Metric::Accuracy),
            precision: f(Metric::Precision),
            recall: f(Metric::Recall),
            f_measure: f(Metric::FMeasure),
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy, precision, recall and F-measure of the positive class. Any 0/0
/// ratio is 0.
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f_measure = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Metrics {
        accuracy: ratio(cm.tp + cm.tn, total),
        precision,
        recall,
        f_measure,
    })
}

/// One cross-validated run: fixed method, task, classifier, fold count and
/// seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub method: Method,
    pub task: Task,
    pub classifier: ModelKind,
    pub folds: usize,
    pub seed: u64,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

/// Cross-validates `kind` on `ds` once per seed. Results follow `seeds`.
pub fn cross_validate(
    ds: &Dataset,
    kind: ModelKind,
    k: usize,
    seeds: &[u64],
    stratify: bool,
) -> Result<Vec<RunResult>, EvalError> {
    if seeds.is_empty() {
        return Err(EvalError::NoSeeds);
    }
    let labels = ds.labels();
    seeds
        .par_iter()
        .map(|&seed| {
            let plan = make_folds(&labels, k, seed, stratify)?;
            let mut confusion = ConfusionMatrix::default();
            for (fold, test) in plan.folds().iter().enumerate() {
                let train_idx: Vec<usize> = (0..ds.len())
                    .filter(|&i| plan.assignment[i] != fold)
                    .collect();
                let model = classify::train(kind, &ds.subset(&train_idx))
                    .map_err(|source| EvalError::Training { seed, fold, source })?;
                for &i in test {
                    let inst = &ds.instances[i];
                    let p = model
                        .predict(&inst.features)
                        .map_err(|source| EvalError::Training { seed, fold, source })?;
                    confusion.record(inst.class, p.label);
                }
            }
            Ok(RunResult {
                method: ds.method,
                task: ds.task,
                classifier: kind,
                folds: k,
                seed,
                metrics: metrics(&confusion)?,
                confusion,
            })
        })
        .collect()
}

/// Mean and sample standard deviation of each measure over a set of runs
/// sharing one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: Method,
    pub task: Task,
    pub classifier: ModelKind,
    pub folds: usize,
    pub runs: usize,
    pub mean: Metrics,
    pub std_dev: Metrics,
}

pub fn aggregate(rs: &[RunResult]) -> Result<Aggregate, EvalError> {
    let first = rs.first().ok_or(EvalError::NoResults)?;
    let key = |r: &RunResult| (r.method, r.task, r.classifier, r.folds);
    if let Some(other) = rs.iter().find(|r| key(r) != key(first)) {
        return Err(EvalError::MixedConfigurations(format!(
            "{}/{}/{}/{} vs {}/{}/{}/{}",
            first.method,
            first.task,
            first.classifier,
            first.folds,
            other.method,
            other.task,
            other.classifier,
            other.folds
        )));
    }
    let n = rs.len() as f64;
    let mean = Metrics::from_fn(|m| rs.iter().map(|r| r.metrics.get(m)).sum::<f64>() / n);
    let std_dev = Metrics::from_fn(|m| {
        if rs.len() < 2 {
            return 0.0;
        }
        let mu = mean.get(m);
        let ss: f64 = rs.iter().map(|r| (r.metrics.get(m) - mu).powi(2)).sum();
        (ss / (n - 1.0)).sqrt()
    });
    Ok(Aggregate {
        method: first.method,
        task: first.task,
        classifier: first.classifier,
        folds: first.folds,
        runs: rs.len(),
        mean,
        std_dev,
    })
}

/// Groups results by (method, task, classifier, folds) in sorted key order
/// and aggregates each group.
pub fn aggregate_all(rs: &[RunResult]) -> Result<Vec<Aggregate>, EvalError> {
    let mut groups: std::collections::BTreeMap<_, Vec<RunResult>> = Default::default();
    for r in rs {
        groups
            .entry((r.task, r.classifier, r.method, r.folds))
            .or_default()
            .push(r.clone());
    }
    groups.values().map(|g| aggregate(g)).collect()
}

pub fn write_results_csv(path: impl AsRef<Path>, rs: &[RunResult]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RESULTS_HEADER)?;
    for r in rs {
        w.write_record([
            r.method.as_str().to_string(),
            r.task.as_str().to_string(),
            r.classifier.as_str().to_string(),
            r.folds.to_string(),
            r.seed.to_string(),
            r.confusion.tp.to_string(),
            r.confusion.fp.to_string(),
            r.confusion.fn_.to_string(),
            r.confusion.tn.to_string(),
            r.metrics.accuracy.to_string(),
            r.metrics.precision.to_string(),
            r.metrics.recall.to_string(),
            r.metrics.f_measure.to_string(),
        ])?;
    }
    w.flush()
}

pub fn read_results_csv(path: impl AsRef<Path>) -> Result<Vec<RunResult>, EvalError> {
    let path = path.as_ref();
    let bad = |msg: String| EvalError::ResultsFile(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(RESULTS_HEADER.iter().copied()) {
        return Err(bad("unexpected header".into()));
    }
    let mut out = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let err = |what: &str| bad(format!("row {}: bad {what}", row + 1));
        let int = |i: usize, what: &str| field(i).parse::<u64>().map_err(|_| err(what));
        let real = |i: usize, what: &str| field(i).parse::<f64>().map_err(|_| err(what));
        out.push(RunResult {
            method: field(0).parse().map_err(|_| err("method"))?,
            task: field(1).parse().map_err(|_| err("task"))?,
            classifier: field(2).parse().map_err(|_| err("classifier"))?,
            folds: int(3, "folds")? as usize,
            seed: int(4, "seed")?,
            confusion: ConfusionMatrix {
                tp: int(5, "tp")?,
                fp: int(6, "fp")?,
                fn_: int(7, "fn")?,
                tn: int(8, "tn")?,
            },
            metrics: Metrics {
                accuracy: real(9, "accuracy")?,
                precision: real(10, "precision")?,
                recall: real(11, "recall")?,
                f_measure: real(12, "f_measure")?,
            },
        });
    }
    Ok(out)
}
