//! Experiment configuration: defaults, a flat `key = value` file format,
//! and validation.
//!
//! Every key is also a command-line flag of the same name, so a config file
//! and a set of flag overrides go through the same [`ExperimentConfig::set`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::classify::ModelKind;
use crate::features::{Method, Task};
use crate::stats::{SampleUnit, TTestMode};

pub const DEFAULT_FOLDS: [usize; 4] = [10, 20, 30, 40];
pub const DEFAULT_RUNS: usize = 10;
pub const DEFAULT_SEED_BASE: u64 = 42;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Keys accepted in config files and as `--key` flags.
pub const KEYS: [&str; 15] = [
    "manifest",
    "stoplist",
    "keywords",
    "task",
    "method",
    "classifier",
    "folds",
    "runs",
    "seed-base",
    "no-stratify",
    "ttest",
    "alpha",
    "out",
    "pool-folds",
    "stats-folds",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Where a word list comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ListSource {
    /// The built-in stop list, or keywords derived from the corpus.
    Default,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub manifest: Option<PathBuf>,
    pub stoplist: ListSource,
    pub keywords: ListSource,
    pub tasks: Vec<Task>,
    pub methods: Vec<Method>,
    pub classifiers: Vec<ModelKind>,
    pub folds: Vec<usize>,
    pub runs: usize,
    pub seed_base: u64,
    pub stratify: bool,
    pub ttest: TTestMode,
    pub alpha: f64,
    pub out: PathBuf,
    pub pool_folds: bool,
    /// Fold count whose per-seed runs feed the t-tests; defaults to the first
    /// entry of `folds`.
    pub stats_folds: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            manifest: None,
            stoplist: ListSource::Default,
            keywords: ListSource::Default,
            tasks: Task::ALL.to_vec(),
            methods: Method::ALL.to_vec(),
            classifiers: ModelKind::ALL.to_vec(),
            folds: DEFAULT_FOLDS.to_vec(),
            runs: DEFAULT_RUNS,
            seed_base: DEFAULT_SEED_BASE,
            stratify: true,
            ttest: TTestMode::Paired,
            alpha: DEFAULT_ALPHA,
            out: PathBuf::from("errc-out"),
            pool_folds: false,
            stats_folds: None,
        }
    }
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        out.push(parse_one(key, part)?);
    }
    Ok(out)
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "" | "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::BadValue {
            key: key.into(),
            value: value.into(),
            reason: "expected true or false".into(),
        }),
    }
}

fn source(value: &str, default_word: &str, base: &Path) -> ListSource {
    if value == default_word {
        ListSource::Default
    } else {
        ListSource::File(base.join(value))
    }
}

impl ExperimentConfig {
    /// Reads a config file on top of the defaults. Relative paths inside the
    /// file resolve against the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(&text, path.parent().unwrap_or(Path::new("")))?;
        Ok(cfg)
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str, base: &Path) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set_relative(key.trim(), value.trim(), base)?;
        }
        Ok(())
    }

    /// Sets one key; paths are taken as given.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        self.set_relative(key, value, Path::new(""))
    }

    fn set_relative(&mut self, key: &str, value: &str, base: &Path) -> Result<(), ConfigError> {
        match key {
            "manifest" => self.manifest = Some(base.join(value)),
            "stoplist" => self.stoplist = source(value, "builtin", base),
            "keywords" => self.keywords = source(value, "derive", base),
            "task" => self.tasks = list(key, value)?,
            "method" => self.methods = list(key, value)?,
            "classifier" => self.classifiers = list(key, value)?,
            "folds" => self.folds = list(key, value)?,
            "runs" => self.runs = parse_one(key, value)?,
            "seed-base" => self.seed_base = parse_one(key, value)?,
            "no-stratify" => self.stratify = !parse_bool(key, value)?,
            "ttest" => self.ttest = parse_one(key, value)?,
            "alpha" => self.alpha = parse_one(key, value)?,
            "out" => self.out = base.join(value),
            "pool-folds" => self.pool_folds = parse_bool(key, value)?,
            "stats-folds" => self.stats_folds = Some(parse_one(key, value)?),
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.folds.is_empty() {
            return bad("folds is empty".into());
        }
        if let Some(k) = self.folds.iter().find(|&&k| k < 2) {
            return bad(format!("fold count {k} is below 2"));
        }
        if self.runs < 1 {
            return bad("runs must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} is outside (0, 1)", self.alpha));
        }
        if self.tasks.is_empty() || self.methods.is_empty() || self.classifiers.is_empty() {
            return bad("task, method and classifier each need at least one entry".into());
        }
        if let Some(k) = self.stats_folds {
            if !self.folds.contains(&k) {
                return bad(format!(
                    "stats-folds {k} is not one of the configured folds"
                ));
            }
        }
        Ok(())
    }

    pub fn manifest(&self) -> Result<&Path, ConfigError> {
        self.manifest
            .as_deref()
            .ok_or_else(|| ConfigError::Invalid("no manifest given".into()))
    }

    /// `seed_base + i` for each run index `i`.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.runs as u64).map(|i| self.seed_base + i).collect()
    }

    pub fn sample_unit(&self) -> SampleUnit {
        if self.pool_folds {
            SampleUnit::PooledFolds
        } else {
            SampleUnit::PerSeed {
                folds: self.stats_folds.unwrap_or(self.folds[0]),
            }
        }
    }

    /// The effective configuration in config-file syntax.
    pub fn to_file_string(&self) -> String {
        fn join<T: ToString>(xs: &[T]) -> String {
            xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
        }
        fn src(s: &ListSource, default_word: &str) -> String {
            match s {
                ListSource::Default => default_word.into(),
                ListSource::File(p) => p.display().to_string(),
            }
        }
        let mut out = String::new();
        if let Some(m) = &self.manifest {
            let _ = writeln!(out, "manifest = {}", m.display());
        }
        let _ = writeln!(out, "stoplist = {}", src(&self.stoplist, "builtin"));
        let _ = writeln!(out, "keywords = {}", src(&self.keywords, "derive"));
        let _ = writeln!(out, "task = {}", join(&self.tasks));
        let _ = writeln!(out, "method = {}", join(&self.methods));
        let _ = writeln!(out, "classifier = {}", join(&self.classifiers));
        let _ = writeln!(out, "folds = {}", join(&self.folds));
        let _ = writeln!(out, "runs = {}", self.runs);
        let _ = writeln!(out, "seed-base = {}", self.seed_base);
        let _ = writeln!(out, "no-stratify = {}", !self.stratify);
        let _ = writeln!(out, "ttest = {}", self.ttest);
        let _ = writeln!(out, "alpha = {}", self.alpha);
        let _ = writeln!(out, "out = {}", self.out.display());
        let _ = writeln!(out, "pool-folds = {}", self.pool_folds);
        if let Some(k) = self.stats_folds {
            let _ = writeln!(out, "stats-folds = {k}");
        }
        out
    }
}
