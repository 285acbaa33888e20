use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use errc::classify::{self, model_from_json, model_to_json};
use errc::config::ExperimentConfig;
use errc::pipeline::{self, Layout};
use errc::synthetic;
use errc::textprep::StopList;

/// Classify research papers as RE/non-RE and empirical/non-empirical, and
/// compare ERRC top-stem features against baseline keyword counts.
#[derive(Parser)]
#[command(name = "errc", version)]
struct Cli {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Experiment settings. Each flag overrides the config-file key of the same
/// name.
#[derive(Args, Default)]
struct ExperimentFlags {
    /// Corpus manifest CSV.
    #[arg(long)]
    manifest: Option<String>,
    /// Stop-list file, or "builtin".
    #[arg(long)]
    stoplist: Option<String>,
    /// Keyword file, or "derive" to take the top stems per conference.
    #[arg(long)]
    keywords: Option<String>,
    /// Tasks, comma separated: re, empirical.
    #[arg(long)]
    task: Option<String>,
    /// Methods, comma separated: baseline, errc.
    #[arg(long)]
    method: Option<String>,
    /// Classifiers, comma separated: zeror, nb, tree.
    #[arg(long)]
    classifier: Option<String>,
    /// Fold counts, comma separated.
    #[arg(long)]
    folds: Option<String>,
    /// Cross-validation repetitions per fold count.
    #[arg(long)]
    runs: Option<String>,
    /// Seed of the first run; run i uses seed-base + i.
    #[arg(long = "seed-base")]
    seed_base: Option<String>,
    /// Assign folds without stratifying by class.
    #[arg(long = "no-stratify")]
    no_stratify: bool,
    /// paired or welch.
    #[arg(long)]
    ttest: Option<String>,
    /// Significance level.
    #[arg(long)]
    alpha: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Use every (folds, seed) run as a t-test sample instead of one fold count.
    #[arg(long = "pool-folds")]
    pool_folds: bool,
    /// Fold count whose per-seed runs feed the t-tests (default: first of --folds).
    #[arg(long = "stats-folds")]
    stats_folds: Option<String>,
}

impl ExperimentFlags {
    fn resolve(&self, file: Option<&PathBuf>) -> Result<ExperimentConfig> {
        let mut cfg = match file {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        let pairs = [
            ("manifest", &self.manifest),
            ("stoplist", &self.stoplist),
            ("keywords", &self.keywords),
            ("task", &self.task),
            ("method", &self.method),
            ("classifier", &self.classifier),
            ("folds", &self.folds),
            ("runs", &self.runs),
            ("seed-base", &self.seed_base),
            ("ttest", &self.ttest),
            ("alpha", &self.alpha),
            ("out", &self.out),
            ("stats-folds", &self.stats_folds),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.no_stratify {
            cfg.set("no-stratify", "true")?;
        }
        if self.pool_folds {
            cfg.set("pool-folds", "true")?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// All six stages in order.
    Run(ExperimentFlags),
    /// Load and validate the manifest; print the label summary.
    Ingest(ExperimentFlags),
    /// Compute term counts for every document.
    Preprocess {
        #[command(flatten)]
        flags: ExperimentFlags,
        /// Print one document's stem counts.
        #[arg(long = "dump-stems", value_name = "ID")]
        dump_stems: Option<String>,
    },
    /// Resolve keywords and build datasets.
    Featurize {
        #[command(flatten)]
        flags: ExperimentFlags,
        /// Print one document's feature vectors.
        #[arg(long, value_name = "ID")]
        show: Option<String>,
    },
    /// Cross-validate every classifier on every dataset.
    Evaluate(ExperimentFlags),
    /// One-tailed t-tests of ERRC against baseline.
    Compare(ExperimentFlags),
    /// Write summary files and plots.
    Report(ExperimentFlags),
    /// Train one classifier on a whole featurized dataset and save it.
    Train {
        #[command(flatten)]
        flags: ExperimentFlags,
        #[arg(long = "save-model", value_name = "PATH")]
        save_model: PathBuf,
    },
    /// Predict documents of a featurized dataset with a saved model.
    Predict {
        #[command(flatten)]
        flags: ExperimentFlags,
        #[arg(long = "load-model", value_name = "PATH")]
        load_model: PathBuf,
        /// Only this document.
        #[arg(long, value_name = "ID")]
        id: Option<String>,
    },
    /// Print the built-in stop list.
    Stoplist,
    /// Write the synthetic evaluation corpus.
    #[command(hide = true)]
    MakeSynthetic {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = synthetic::DEFAULT_SEED)]
        seed: u64,
    },
}

fn single<T: Copy + std::fmt::Display>(xs: &[T], flag: &str) -> Result<T> {
    match xs {
        [x] => Ok(*x),
        _ => bail!("this command needs exactly one --{flag}"),
    }
}

fn print_decisions(cfg: &ExperimentConfig) -> Result<()> {
    let path = Layout::new(&cfg.out).stats();
    if path.exists() {
        let table = errc::stats::read_stats_csv(&path)?;
        for line in errc::report::decision_lines(&table) {
            println!("{line}");
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let file = cli.config.as_ref();
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Run(flags) => {
            let cfg = flags.resolve(file)?;
            let out = pipeline::run(&cfg)?;
            write!(stdout, "{}", out.summary)?;
        }
        Command::Ingest(flags) => {
            let cfg = flags.resolve(file)?;
            let out = pipeline::ingest(&cfg)?;
            if !out.report.is_ok() {
                eprint!("{}", out.report);
            }
            write!(stdout, "{}", out.summary)?;
        }
        Command::Preprocess { flags, dump_stems } => {
            let cfg = flags.resolve(file)?;
            let counts = pipeline::preprocess(&cfg)?;
            match dump_stems {
                Some(id) => {
                    if !pipeline::dump_stems(&counts, &id, &mut stdout)? {
                        bail!("no document with id {id:?}");
                    }
                }
                None => writeln!(stdout, "term counts for {} documents", counts.len())?,
            }
        }
        Command::Featurize { flags, show } => {
            let cfg = flags.resolve(file)?;
            let out = pipeline::featurize(&cfg)?;
            writeln!(stdout, "keywords: {}", out.keywords.keywords.join(" "))?;
            for ds in &out.datasets {
                for w in &ds.warnings {
                    eprintln!("warning: {w}");
                }
                match &show {
                    Some(id) => {
                        let inst = ds
                            .instances
                            .iter()
                            .find(|i| &i.doc_id == id)
                            .with_context(|| format!("no document with id {id:?}"))?;
                        writeln!(stdout, "{} {} {}:", ds.task, ds.method, inst.doc_id)?;
                        for (attr, v) in ds.schema.attributes.iter().zip(&inst.features) {
                            writeln!(stdout, "  {}\t{}", attr.name, serde_json::to_string(v)?)?;
                        }
                        writeln!(stdout, "  class\t{:?}", inst.class)?;
                    }
                    None => {
                        let [p, n] = ds.class_counts();
                        writeln!(
                            stdout,
                            "{} {}: {p} positive, {n} negative",
                            ds.task, ds.method
                        )?;
                    }
                }
            }
        }
        Command::Evaluate(flags) => {
            let cfg = flags.resolve(file)?;
            let results = pipeline::evaluate(&cfg)?;
            writeln!(
                stdout,
                "{} runs written to {}",
                results.len(),
                Layout::new(&cfg.out).results().display()
            )?;
        }
        Command::Compare(flags) => {
            let cfg = flags.resolve(file)?;
            match pipeline::compare(&cfg)? {
                Some(table) => write!(stdout, "{}", errc::stats::render_table(&table))?,
                None => writeln!(
                    stdout,
                    "nothing to compare: need both methods and nb or tree"
                )?,
            }
            drop(stdout);
            print_decisions(&cfg)?;
        }
        Command::Report(flags) => {
            let cfg = flags.resolve(file)?;
            let out = pipeline::report(&cfg)?;
            write!(stdout, "{}", out.summary)?;
        }
        Command::Train { flags, save_model } => {
            let cfg = flags.resolve(file)?;
            let layout = Layout::new(&cfg.out);
            let task = single(&cfg.tasks, "task")?;
            let method = single(&cfg.methods, "method")?;
            let kind = single(&cfg.classifiers, "classifier")?;
            let ds = pipeline::load_dataset(&layout, task, method)?;
            let model = classify::train(kind, &ds)?;
            std::fs::write(&save_model, model_to_json(&model))
                .with_context(|| format!("writing {}", save_model.display()))?;
            writeln!(
                stdout,
                "{kind} model for {task}/{method} saved to {}",
                save_model.display()
            )?;
        }
        Command::Predict {
            flags,
            load_model,
            id,
        } => {
            let cfg = flags.resolve(file)?;
            let layout = Layout::new(&cfg.out);
            let json = std::fs::read_to_string(&load_model)
                .with_context(|| format!("reading {}", load_model.display()))?;
            let model = model_from_json(&json)?;
            let ds = pipeline::load_dataset(
                &layout,
                single(&cfg.tasks, "task")?,
                single(&cfg.methods, "method")?,
            )?;
            let mut seen = false;
            for inst in ds
                .instances
                .iter()
                .filter(|i| id.as_ref().is_none_or(|id| &i.doc_id == id))
            {
                let p = model.predict(&inst.features)?;
                writeln!(
                    stdout,
                    "{}\t{:?}\t{:.6}\t{:.6}",
                    inst.doc_id, p.label, p.scores[0], p.scores[1]
                )?;
                seen = true;
            }
            if !seen {
                bail!("no matching documents");
            }
        }
        Command::Stoplist => {
            for w in StopList::builtin().iter() {
                writeln!(stdout, "{w}")?;
            }
        }
        Command::MakeSynthetic { dir, seed } => {
            let manifest = synthetic::write_corpus(&dir, seed)
                .with_context(|| format!("writing synthetic corpus to {}", dir.display()))?;
            writeln!(stdout, "{}", manifest.display())?;
        }
    }
    Ok(())
}
