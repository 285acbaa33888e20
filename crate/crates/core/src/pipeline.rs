//! The experiment as six stages that communicate through files:
//!
//! | stage        | reads                            | writes                                   |
//! |--------------|----------------------------------|------------------------------------------|
//! | `ingest`     | manifest                         | `stages/corpus.csv`, `stages/labels.txt` |
//! | `preprocess` | corpus, stop list                | `stages/term_counts.jsonl`               |
//! | `featurize`  | corpus, term counts, keywords    | `stages/keywords.txt`, `stages/dataset_<task>_<method>.json` |
//! | `evaluate`   | datasets                         | `results.csv`                            |
//! | `compare`    | `results.csv`                    | `stats.csv`                              |
//! | `report`     | `results.csv`, `stats.csv`       | `aggregate.csv`, `summary.txt`, `plots/` |
//!
//! [`run`] is exactly the six stages in order.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::classify::ClassifyError;
use crate::config::{ConfigError, ExperimentConfig, ListSource};
use crate::corpus::{self, Corpus, CorpusError, LabelSummary, ValidationReport};
use crate::eval::{self, EvalError, RunResult};
use crate::features::{
    self, Dataset, FeaturesError, KeywordSet, Method, Task, KEYWORDS_PER_SOURCE,
};
use crate::report::{self, ReportError};
use crate::stats::{self, SignificanceTable, StatsError};
use crate::textprep::{self, StopList, TermCounts, TextprepError};

pub const THREADS_ENV: &str = "ERRC_THREADS";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error("corpus: validation failed\n{0}")]
    Invalid(ValidationReport),
    #[error("textprep: {0}")]
    Textprep(#[from] TextprepError),
    #[error("features: {0}")]
    Features(#[from] FeaturesError),
    #[error("classify: {0}")]
    Classify(#[from] ClassifyError),
    #[error("eval: {0}")]
    Eval(#[from] EvalError),
    #[error("stats: {0}")]
    Stats(#[from] StatsError),
    #[error("report: {0}")]
    Report(#[from] ReportError),
    #[error("missing {what}: {path} not found (run `{stage}` first)")]
    Missing {
        what: &'static str,
        path: PathBuf,
        stage: &'static str,
    },
    #[error("{path}: {reason}")]
    Artifact { path: PathBuf, reason: String },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Threads(String),
}

type Result<T> = std::result::Result<T, PipelineError>;

/// Paths of every artifact under an output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub out: PathBuf,
}

impl Layout {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Layout { out: out.into() }
    }

    pub fn stages(&self) -> PathBuf {
        self.out.join("stages")
    }

    pub fn corpus(&self) -> PathBuf {
        self.stages().join("corpus.csv")
    }

    pub fn labels(&self) -> PathBuf {
        self.stages().join("labels.txt")
    }

    pub fn term_counts(&self) -> PathBuf {
        self.stages().join("term_counts.jsonl")
    }

    pub fn keywords(&self) -> PathBuf {
        self.stages().join("keywords.txt")
    }

    pub fn dataset(&self, task: Task, method: Method) -> PathBuf {
        self.stages().join(format!(
            "dataset_{}_{}.json",
            task.as_str(),
            method.as_str()
        ))
    }

    pub fn results(&self) -> PathBuf {
        self.out.join("results.csv")
    }

    pub fn stats(&self) -> PathBuf {
        self.out.join("stats.csv")
    }

    pub fn summary(&self) -> PathBuf {
        self.out.join("summary.txt")
    }

    pub fn plots(&self) -> PathBuf {
        self.out.join("plots")
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    fs::write(path, contents).map_err(io(path))
}

fn require(path: PathBuf, what: &'static str, stage: &'static str) -> Result<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(PipelineError::Missing { what, path, stage })
    }
}

/// Runs `f` on a rayon pool capped by `ERRC_THREADS` when it is set.
pub fn with_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| {
            PipelineError::Threads(format!("{THREADS_ENV}={v:?} is not a thread count"))
        })?;
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| PipelineError::Threads(e.to_string()))?;
    Ok(pool.install(f))
}

#[derive(Debug)]
pub struct IngestOutput {
    pub corpus: Corpus,
    pub summary: LabelSummary,
    pub report: ValidationReport,
}

/// Loads and validates the manifest, then records the corpus with absolute
/// document paths and its label summary.
pub fn ingest(cfg: &ExperimentConfig) -> Result<IngestOutput> {
    cfg.validate()?;
    let layout = Layout::new(&cfg.out);
    let mut corpus = corpus::load_manifest(cfg.manifest()?)?;
    for d in &mut corpus.documents {
        d.path = std::path::absolute(&d.path).map_err(io(&d.path))?;
    }
    let report = corpus::validate(&corpus);
    if report.has_errors() {
        return Err(PipelineError::Invalid(report));
    }
    let summary = corpus::summarize(&corpus)?;

    let path = layout.corpus();
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    corpus::write_manifest(&path, &corpus.documents).map_err(io(&path))?;
    write(&layout.labels(), summary.to_string())?;
    write(&cfg.out.join("config.txt"), cfg.to_file_string())?;
    Ok(IngestOutput {
        corpus,
        summary,
        report,
    })
}

pub fn load_corpus(layout: &Layout) -> Result<Corpus> {
    Ok(corpus::load_manifest(require(
        layout.corpus(),
        "corpus",
        "ingest",
    )?)?)
}

pub fn stop_list(cfg: &ExperimentConfig) -> Result<StopList> {
    Ok(match &cfg.stoplist {
        ListSource::Default => StopList::builtin(),
        ListSource::File(p) => StopList::from_file(p)?,
    })
}

/// Term counts for every document, in corpus order.
pub fn preprocess(cfg: &ExperimentConfig) -> Result<Vec<TermCounts>> {
    let layout = Layout::new(&cfg.out);
    let corpus = load_corpus(&layout)?;
    let stops = stop_list(cfg)?;
    let counts: Vec<TermCounts> = with_thread_pool(|| {
        corpus
            .documents
            .par_iter()
            .map(|d| textprep::term_counts(d, &stops))
            .collect::<std::result::Result<Vec<_>, _>>()
    })??;
    let mut buf = Vec::new();
    for tc in &counts {
        serde_json::to_writer(&mut buf, tc).expect("term counts serialize");
        buf.push(b'\n');
    }
    write(&layout.term_counts(), buf)?;
    Ok(counts)
}

pub fn load_term_counts(layout: &Layout) -> Result<Vec<TermCounts>> {
    let path = require(layout.term_counts(), "term counts", "preprocess")?;
    let file = fs::File::open(&path).map_err(io(&path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io(&path))?;
        out.push(
            serde_json::from_str(&line).map_err(|e| PipelineError::Artifact {
                path: path.clone(),
                reason: format!("line {}: {e}", i + 1),
            })?,
        );
    }
    Ok(out)
}

#[derive(Debug)]
pub struct FeaturizeOutput {
    pub keywords: KeywordSet,
    pub datasets: Vec<Dataset>,
}

/// Resolves the keyword set (file or derived) and builds one dataset per
/// configured (task, method).
pub fn featurize(cfg: &ExperimentConfig) -> Result<FeaturizeOutput> {
    let layout = Layout::new(&cfg.out);
    let corpus = load_corpus(&layout)?;
    let counts = load_term_counts(&layout)?;
    let keywords = match &cfg.keywords {
        ListSource::File(p) => KeywordSet::from_file(p)?,
        ListSource::Default => features::derive_keywords(&corpus, &counts, KEYWORDS_PER_SOURCE)?,
    };
    write(&layout.keywords(), keywords.to_file_string())?;
    let mut datasets = Vec::new();
    for &task in &cfg.tasks {
        for &method in &cfg.methods {
            let ds =
                features::dataset_from_counts(&corpus, &counts, method, task, Some(&keywords))?;
            let json = serde_json::to_string(&ds).expect("dataset serializes");
            write(&layout.dataset(task, method), json + "\n")?;
            datasets.push(ds);
        }
    }
    Ok(FeaturizeOutput { keywords, datasets })
}

pub fn load_dataset(layout: &Layout, task: Task, method: Method) -> Result<Dataset> {
    let path = require(layout.dataset(task, method), "dataset", "featurize")?;
    let text = fs::read_to_string(&path).map_err(io(&path))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Artifact {
        path,
        reason: e.to_string(),
    })
}

/// Cross-validates every configured classifier on every dataset at every
/// fold count. Results are ordered by task, method, classifier, folds, seed.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<Vec<RunResult>> {
    cfg.validate()?;
    let layout = Layout::new(&cfg.out);
    let seeds = cfg.seeds();
    let mut jobs = Vec::new();
    for &task in &cfg.tasks {
        for &method in &cfg.methods {
            let ds = load_dataset(&layout, task, method)?;
            for &kind in &cfg.classifiers {
                for &k in &cfg.folds {
                    jobs.push((ds.clone(), kind, k));
                }
            }
        }
    }
    let per_job = with_thread_pool(|| {
        jobs.par_iter()
            .map(|(ds, kind, k)| eval::cross_validate(ds, *kind, *k, &seeds, cfg.stratify))
            .collect::<std::result::Result<Vec<_>, _>>()
    })??;
    let results: Vec<RunResult> = per_job.into_iter().flatten().collect();
    let path = layout.results();
    fs::create_dir_all(&cfg.out).map_err(io(&cfg.out))?;
    eval::write_results_csv(&path, &results).map_err(io(&path))?;
    Ok(results)
}

pub fn load_results(layout: &Layout) -> Result<Vec<RunResult>> {
    let path = require(layout.results(), "results", "evaluate")?;
    Ok(eval::read_results_csv(path)?)
}

/// True when the configuration yields at least one table cell.
pub fn has_comparison(cfg: &ExperimentConfig) -> bool {
    cfg.methods.contains(&Method::Errc)
        && cfg.methods.contains(&Method::Baseline)
        && cfg
            .classifiers
            .iter()
            .any(|c| stats::TABLE_CLASSIFIERS.contains(c))
}

/// Builds the significance table from `results.csv`. Returns `None` (and
/// removes any stale `stats.csv`) when the configuration has nothing to
/// compare.
pub fn compare(cfg: &ExperimentConfig) -> Result<Option<SignificanceTable>> {
    cfg.validate()?;
    let layout = Layout::new(&cfg.out);
    let results = load_results(&layout)?;
    let path = layout.stats();
    if !has_comparison(cfg) {
        if path.exists() {
            fs::remove_file(&path).map_err(io(&path))?;
        }
        return Ok(None);
    }
    let table = stats::compare_table(&results, cfg.alpha, cfg.ttest, cfg.sample_unit())?;
    stats::write_stats_csv(&path, &table).map_err(io(&path))?;
    Ok(Some(table))
}

#[derive(Debug)]
pub struct ReportOutput {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

pub fn report(cfg: &ExperimentConfig) -> Result<ReportOutput> {
    let layout = Layout::new(&cfg.out);
    let results = load_results(&layout)?;
    let table = if has_comparison(cfg) {
        stats::read_stats_csv(require(layout.stats(), "stats", "compare")?)?
    } else {
        SignificanceTable { rows: Vec::new() }
    };
    let files = report::emit_report(&results, &table, &cfg.out)?;
    Ok(ReportOutput {
        summary: report::summary_text(&results, &table),
        files,
    })
}

/// Ingest, preprocess, featurize, evaluate, compare and report, in order.
pub fn run(cfg: &ExperimentConfig) -> Result<ReportOutput> {
    cfg.validate()?;
    ingest(cfg)?;
    preprocess(cfg)?;
    featurize(cfg)?;
    evaluate(cfg)?;
    compare(cfg)?;
    report(cfg)
}

/// Writes a document's term counts as `stem<TAB>count` lines, most frequent
/// first.
pub fn dump_stems(counts: &[TermCounts], id: &str, out: &mut impl std::io::Write) -> Result<bool> {
    let Some(tc) = counts.iter().find(|tc| tc.doc_id == id) else {
        return Ok(false);
    };
    let mut pairs: Vec<(&String, &u64)> = tc.counts.iter().collect();
    pairs.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    let stdout = Path::new("<stdout>");
    writeln!(
        out,
        "# {}: {} tokens, {} stems",
        tc.doc_id,
        tc.total_tokens,
        pairs.len()
    )
    .map_err(io(stdout))?;
    for (s, c) in pairs {
        writeln!(out, "{s}\t{c}").map_err(io(stdout))?;
    }
    Ok(true)
}
