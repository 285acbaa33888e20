//! One-tailed t-tests of "ERRC mean > baseline mean" and the Student-t tail
//! probability behind them.
//!
//! ```
//! use errc::stats::{student_t_tail, t_test, TTestMode};
//!
//! assert_eq!(student_t_tail(0.0, 7.0).unwrap(), 0.5);
//! assert!((student_t_tail(1.0, 1.0).unwrap() - 0.25).abs() < 1e-12);
//!
//! let errc = [0.71, 0.74, 0.69, 0.75, 0.72];
//! let base = [0.66, 0.70, 0.68, 0.69, 0.65];
//! let r = t_test(&errc, &base, 0.05, TTestMode::Paired).unwrap();
//! assert!(r.t_statistic > 0.0 && r.significant);
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::ModelKind;
use crate::eval::{Metric, RunResult};
use crate::features::{Method, Task};

/// Column order of `stats.csv`.
pub const STATS_HEADER: [&str; 9] = [
    "task",
    "classifier",
    "metric",
    "mode",
    "t",
    "df",
    "p_one_tailed",
    "alpha",
    "significant",
];

/// Metric order of the significance table.
pub const TABLE_METRICS: [Metric; 4] = [
    Metric::Accuracy,
    Metric::Recall,
    Metric::Precision,
    Metric::FMeasure,
];

/// Classifier order of the significance table. ZeroR is not compared.
pub const TABLE_CLASSIFIERS: [ModelKind; 2] = [ModelKind::NaiveBayes, ModelKind::Tree];

/// Task (column) order of the significance table.
pub const TABLE_TASKS: [Task; 2] = [Task::Empirical, Task::Re];

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("degrees of freedom must be positive, got {0}")]
    NonPositiveDf(f64),
    #[error("paired samples differ in length ({errc} vs {base})")]
    LengthMismatch { errc: usize, base: usize },
    #[error("each sample needs at least 2 values (got {0})")]
    TooFewValues(usize),
    #[error("alpha must lie in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error("missing results for {0}")]
    MissingCell(String),
    #[error("no comparable results (need both methods for naive Bayes or tree)")]
    NoCells,
    #[error("stats file: {0}")]
    StatsFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestMode {
    Paired,
    Welch,
}

impl TTestMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TTestMode::Paired => "paired",
            TTestMode::Welch => "welch",
        }
    }
}

impl fmt::Display for TTestMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TTestMode {
    type Err = StatsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paired" => Ok(TTestMode::Paired),
            "welch" => Ok(TTestMode::Welch),
            _ => Err(StatsError::StatsFile(format!("unknown t-test mode {s:?}"))),
        }
    }
}

/// Natural log of the gamma function (Lanczos, g = 7, nine terms).
fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 10_000;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b), with `y = 1 - x` supplied
/// separately so callers can avoid cancellation.
fn regularized_beta(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * y.ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, y) / b
    }
}

/// Upper tail P(T >= t) of Student's t distribution with `df` degrees of
/// freedom.
pub fn student_t_tail(t: f64, df: f64) -> Result<f64, StatsError> {
    if !(df > 0.0) {
        return Err(StatsError::NonPositiveDf(df));
    }
    if t == 0.0 {
        return Ok(0.5);
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 0.0 } else { 1.0 });
    }
    let t2 = t * t;
    let x = df / (df + t2);
    let y = t2 / (df + t2);
    let half = 0.5 * regularized_beta(0.5 * df, 0.5, x, y);
    Ok(if t > 0.0 { half } else { 1.0 - half })
}

/// Outcome of a one-tailed test of "ERRC mean > baseline mean".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_one_tailed: f64,
    pub alpha: f64,
    pub significant: bool,
    pub mode: TTestMode,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Relative size below which a standard error counts as zero.
const ZERO_SPREAD: f64 = 1e-12;

fn finish(t: f64, df: f64, alpha: f64, mode: TTestMode) -> Result<TTestResult, StatsError> {
    let p = student_t_tail(t, df)?;
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_one_tailed: p,
        alpha,
        significant: p < alpha,
        mode,
    })
}

/// Statistic for a zero-spread comparison: 0 when the shift is zero,
/// otherwise an infinite t in the direction of the shift.
fn degenerate_t(shift: f64) -> f64 {
    if shift == 0.0 {
        0.0
    } else {
        shift.signum() * f64::INFINITY
    }
}

/// One-tailed t-test with alternative "mean(errc) > mean(base)".
///
/// When the spread is zero the result is reported rather than raised:
/// t = 0, p = 0.5 for no shift; p = 0 (or 1) for a constant positive (or
/// negative) shift.
pub fn t_test(
    errc: &[f64],
    base: &[f64],
    alpha: f64,
    mode: TTestMode,
) -> Result<TTestResult, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::BadAlpha(alpha));
    }
    match mode {
        TTestMode::Paired => {
            if errc.len() != base.len() {
                return Err(StatsError::LengthMismatch {
                    errc: errc.len(),
                    base: base.len(),
                });
            }
            if errc.len() < 2 {
                return Err(StatsError::TooFewValues(errc.len()));
            }
            let d: Vec<f64> = errc.iter().zip(base).map(|(a, b)| a - b).collect();
            let n = d.len() as f64;
            let md = mean(&d);
            let sd = sample_variance(&d).sqrt();
            let scale = d.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            let t = if sd <= ZERO_SPREAD * scale || sd == 0.0 {
                degenerate_t(if scale == 0.0 { 0.0 } else { md })
            } else {
                md / (sd / n.sqrt())
            };
            finish(t, n - 1.0, alpha, mode)
        }
        TTestMode::Welch => {
            let shortest = errc.len().min(base.len());
            if shortest < 2 {
                return Err(StatsError::TooFewValues(shortest));
            }
            let (n1, n2) = (errc.len() as f64, base.len() as f64);
            let (m1, m2) = (mean(errc), mean(base));
            let (a, b) = (sample_variance(errc) / n1, sample_variance(base) / n2);
            let se = (a + b).sqrt();
            let scale = m1.abs().max(m2.abs());
            if se <= ZERO_SPREAD * scale || se == 0.0 {
                let shift = if m1 == m2 { 0.0 } else { m1 - m2 };
                return finish(degenerate_t(shift), n1 + n2 - 2.0, alpha, mode);
            }
            let df = (a + b).powi(2) / (a * a / (n1 - 1.0) + b * b / (n2 - 1.0));
            finish((m1 - m2) / se, df, alpha, mode)
        }
    }
}

/// How per-run values become the samples of one table cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleUnit {
    /// One value per seed at a single fold count.
    PerSeed { folds: usize },
    /// One value per (fold count, seed) over every fold count.
    PooledFolds,
}

/// One cell of the significance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub task: Task,
    pub classifier: ModelKind,
    pub metric: Metric,
    pub result: TTestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceTable {
    pub rows: Vec<StatsRow>,
}

impl SignificanceTable {
    pub fn get(&self, task: Task, classifier: ModelKind, metric: Metric) -> Option<&TTestResult> {
        self.rows
            .iter()
            .find(|r| r.task == task && r.classifier == classifier && r.metric == metric)
            .map(|r| &r.result)
    }
}

type CellKey = (Task, ModelKind, Method);

/// Tests ERRC against baseline for every (task, classifier, metric) cell.
///
/// Cells cover the naive Bayes and tree classifiers for each task that has
/// results. Samples pair runs by `(folds, seed)`.
pub fn compare_table(
    results: &[RunResult],
    alpha: f64,
    mode: TTestMode,
    unit: SampleUnit,
) -> Result<SignificanceTable, StatsError> {
    let mut by_cell: BTreeMap<CellKey, BTreeMap<(usize, u64), &RunResult>> = BTreeMap::new();
    for r in results {
        let keep = match unit {
            SampleUnit::PerSeed { folds } => r.folds == folds,
            SampleUnit::PooledFolds => true,
        };
        if keep {
            by_cell
                .entry((r.task, r.classifier, r.method))
                .or_default()
                .insert((r.folds, r.seed), r);
        }
    }
    let mut rows = Vec::new();
    for metric in TABLE_METRICS {
        for classifier in TABLE_CLASSIFIERS {
            for task in TABLE_TASKS {
                let errc = by_cell.get(&(task, classifier, Method::Errc));
                let base = by_cell.get(&(task, classifier, Method::Baseline));
                let (errc, base) = match (errc, base) {
                    (None, None) => continue,
                    (Some(e), Some(b)) => (e, b),
                    _ => {
                        return Err(StatsError::MissingCell(format!(
                            "{task}/{classifier}: one method has no runs"
                        )))
                    }
                };
                if errc.keys().ne(base.keys()) {
                    return Err(StatsError::MissingCell(format!(
                        "{task}/{classifier}: methods were run on different (folds, seed) pairs"
                    )));
                }
                let e: Vec<f64> = errc.values().map(|r| r.metrics.get(metric)).collect();
                let b: Vec<f64> = base.values().map(|r| r.metrics.get(metric)).collect();
                rows.push(StatsRow {
                    task,
                    classifier,
                    metric,
                    result: t_test(&e, &b, alpha, mode)?,
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(StatsError::NoCells);
    }
    Ok(SignificanceTable { rows })
}

/// Formats a p-value: nine decimals with trailing zeros trimmed, or
/// `d.ddddE-XX` scientific notation below 1e-4.
pub fn format_p_value(p: f64) -> String {
    if p == 0.0 {
        return "0".into();
    }
    if p < 1e-4 {
        let s = format!("{p:.5E}");
        let (mantissa, exp) = s.split_once('E').expect("scientific format");
        let exp: i32 = exp.parse().expect("integer exponent");
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}E{sign}{:02}", exp.abs());
    }
    let s = format!("{p:.9}");
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}

/// Renders the table as Markdown: one block per metric, a row per
/// classifier, a column per task. Significant p-values are bold.
pub fn render_table(table: &SignificanceTable) -> String {
    let tasks: Vec<Task> = TABLE_TASKS
        .into_iter()
        .filter(|t| table.rows.iter().any(|r| r.task == *t))
        .collect();
    let mut out = String::new();
    let _ = write!(out, "|");
    for t in &tasks {
        let _ = write!(out, " | {}", t.title());
    }
    let _ = writeln!(out, " |");
    let _ = write!(out, "|---");
    for _ in &tasks {
        let _ = write!(out, "|---");
    }
    let _ = writeln!(out, "|");
    for metric in TABLE_METRICS {
        let _ = write!(out, "| **{}** P(T > t) one tail", metric.title());
        for _ in &tasks {
            let _ = write!(out, " |");
        }
        let _ = writeln!(out, " |");
        for classifier in TABLE_CLASSIFIERS {
            if !table.rows.iter().any(|r| r.classifier == classifier) {
                continue;
            }
            let _ = write!(out, "| {}", classifier.title());
            for task in &tasks {
                match table.get(*task, classifier, metric) {
                    Some(r) if r.significant => {
                        let _ = write!(out, " | **{}**", format_p_value(r.p_one_tailed));
                    }
                    Some(r) => {
                        let _ = write!(out, " | {}", format_p_value(r.p_one_tailed));
                    }
                    None => {
                        let _ = write!(out, " | -");
                    }
                }
            }
            let _ = writeln!(out, " |");
        }
    }
    out
}

pub fn write_stats_csv(path: impl AsRef<Path>, table: &SignificanceTable) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(STATS_HEADER)?;
    for row in &table.rows {
        let r = &row.result;
        w.write_record([
            row.task.as_str().to_string(),
            row.classifier.as_str().to_string(),
            row.metric.as_str().to_string(),
            r.mode.as_str().to_string(),
            r.t_statistic.to_string(),
            r.degrees_of_freedom.to_string(),
            r.p_one_tailed.to_string(),
            r.alpha.to_string(),
            r.significant.to_string(),
        ])?;
    }
    w.flush()
}

pub fn read_stats_csv(path: impl AsRef<Path>) -> Result<SignificanceTable, StatsError> {
    let path = path.as_ref();
    let bad = |msg: String| StatsError::StatsFile(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(STATS_HEADER.iter().copied()) {
        return Err(bad("unexpected header".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let f = |j: usize| rec.get(j).unwrap_or("");
        let err = |what: &str| bad(format!("row {}: bad {what}", i + 1));
        let real = |j: usize, what: &str| f(j).parse::<f64>().map_err(|_| err(what));
        rows.push(StatsRow {
            task: f(0).parse().map_err(|_| err("task"))?,
            classifier: f(1).parse().map_err(|_| err("classifier"))?,
            metric: f(2).parse().map_err(|_| err("metric"))?,
            result: TTestResult {
                mode: f(3).parse().map_err(|_| err("mode"))?,
                t_statistic: real(4, "t")?,
                degrees_of_freedom: real(5, "df")?,
                p_one_tailed: real(6, "p_one_tailed")?,
                alpha: real(7, "alpha")?,
                significant: f(8).parse().map_err(|_| err("significant"))?,
            },
        });
    }
    Ok(SignificanceTable { rows })
}
