//! Output files: results, aggregates, significance table, a plain-text
//! summary, and metric-vs-folds SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::classify::ModelKind;
use crate::eval::{aggregate_all, write_results_csv, Aggregate, EvalError, Metric, RunResult};
use crate::features::{Method, Task};
use crate::stats::{format_p_value, render_table, write_stats_csv, SignificanceTable, TABLE_TASKS};

pub const AGGREGATE_HEADER: [&str; 13] = [
    "method",
    "task",
    "classifier",
    "folds",
    "runs",
    "accuracy_mean",
    "accuracy_sd",
    "precision_mean",
    "precision_sd",
    "recall_mean",
    "recall_sd",
    "f_measure_mean",
    "f_measure_sd",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no results to report")]
    NoResults,
    #[error("plot {plot}: series for {method} has no points")]
    EmptySeries { plot: String, method: Method },
    #[error("plot {0}: no series")]
    NoSeries(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Mean metric value per fold count for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub method: Method,
    pub points: Vec<(usize, f64)>,
}

/// One metric-vs-folds chart. Values are fractions in [0, 1]; the chart
/// shows them as percentages.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub metric: Metric,
    pub task: Task,
    pub classifier: ModelKind,
    pub series: Vec<Series>,
    pub path: PathBuf,
}

impl PlotSpec {
    pub fn file_name(task: Task, classifier: ModelKind, metric: Metric) -> String {
        format!(
            "{}_{}_{}.svg",
            task.as_str(),
            classifier.as_str(),
            metric.as_str()
        )
    }

    fn name(&self) -> String {
        Self::file_name(self.task, self.classifier, self.metric)
    }
}

/// One plot per (task, classifier, metric) present in `aggs`, written under
/// `plot_dir`.
pub fn plot_specs(aggs: &[Aggregate], plot_dir: &Path) -> Vec<PlotSpec> {
    let mut specs = Vec::new();
    for task in TABLE_TASKS {
        for classifier in ModelKind::ALL {
            let cell: Vec<&Aggregate> = aggs
                .iter()
                .filter(|a| a.task == task && a.classifier == classifier)
                .collect();
            if cell.is_empty() {
                continue;
            }
            for metric in Metric::ALL {
                let series = [Method::Errc, Method::Baseline]
                    .into_iter()
                    .filter_map(|method| {
                        let mut points: Vec<(usize, f64)> = cell
                            .iter()
                            .filter(|a| a.method == method)
                            .map(|a| (a.folds, a.mean.get(metric)))
                            .collect();
                        points.sort_by_key(|p| p.0);
                        (!points.is_empty()).then_some(Series { method, points })
                    })
                    .collect();
                specs.push(PlotSpec {
                    metric,
                    task,
                    classifier,
                    series,
                    path: plot_dir.join(PlotSpec::file_name(task, classifier, metric)),
                });
            }
        }
    }
    specs
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

fn method_style(method: Method) -> (&'static str, &'static str) {
    match method {
        Method::Errc => ("ERRC", "#c0392b"),
        Method::Baseline => ("Baseline", "#2c6fbb"),
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders the chart as a standalone SVG document. Output depends only on
/// `spec`.
pub fn render_svg(spec: &PlotSpec) -> Result<String, ReportError> {
    if spec.series.is_empty() {
        return Err(ReportError::NoSeries(spec.name()));
    }
    if let Some(s) = spec.series.iter().find(|s| s.points.is_empty()) {
        return Err(ReportError::EmptySeries {
            plot: spec.name(),
            method: s.method,
        });
    }

    let mut xs: Vec<usize> = spec
        .series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .collect();
    xs.sort_unstable();
    xs.dedup();
    let (x_lo, x_hi) = (xs[0] as f64, xs[xs.len() - 1] as f64);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |k: usize| {
        if x_hi > x_lo {
            LEFT + (k as f64 - x_lo) / (x_hi - x_lo) * plot_w
        } else {
            LEFT + plot_w / 2.0
        }
    };
    let py = |v: f64| TOP + (1.0 - v.clamp(0.0, 1.0)) * plot_h;

    let title = format!(
        "{} — {} papers, {}",
        spec.metric.title(),
        spec.task.title(),
        spec.classifier.title()
    );
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        xml_escape(&title)
    );

    // axes, grid and ticks
    let _ = writeln!(svg, r##"<g stroke="#999" stroke-width="1">"##);
    for pct in (0..=100).step_by(20) {
        let y = py(pct as f64 / 100.0);
        let _ = writeln!(
            svg,
            r#"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke-opacity="0.3"/>"#,
            LEFT + plot_w
        );
    }
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{:.2}"/>"#,
        TOP + plot_h
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT:.2}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}"/>"#,
        TOP + plot_h,
        LEFT + plot_w
    );
    let _ = writeln!(svg, "</g>");
    for pct in (0..=100).step_by(20) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{pct}</text>"#,
            LEFT - 8.0,
            py(pct as f64 / 100.0) + 4.0
        );
    }
    for &k in &xs {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{k}</text>"#,
            px(k),
            TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Number of cross-validation folds</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{0:.2}" text-anchor="middle" transform="rotate(-90 18 {0:.2})">{1} (%)</text>"#,
        TOP + plot_h / 2.0,
        spec.metric.title()
    );

    for s in &spec.series {
        let (_, color) = method_style(s.method);
        if s.points.len() > 1 {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(k, v)| format!("{:.2},{:.2}", px(k), py(v)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                pts.join(" ")
            );
        }
        for &(k, v) in &s.points {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"><title>{} k={k}: {:.2}%</title></circle>"#,
                px(k),
                py(v),
                method_style(s.method).0,
                v * 100.0
            );
        }
    }

    // legend: swatches are rects so that polylines and circles only ever
    // mark data
    let lx = WIDTH - RIGHT + 20.0;
    for (i, s) in spec.series.iter().enumerate() {
        let (label, color) = method_style(s.method);
        let y = TOP + 10.0 + i as f64 * 22.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{lx:.2}" y="{:.2}" width="18" height="4" fill="{color}"/>"#,
            y - 2.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{label}</text>"#,
            lx + 24.0,
            y + 4.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(spec: &PlotSpec) -> Result<PathBuf, ReportError> {
    let svg = render_svg(spec)?;
    if let Some(dir) = spec.path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(&spec.path, svg).map_err(io_err(&spec.path))?;
    Ok(spec.path.clone())
}

pub fn write_aggregate_csv(path: impl AsRef<Path>, aggs: &[Aggregate]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(AGGREGATE_HEADER)?;
    for a in aggs {
        let mut rec = vec![
            a.method.as_str().to_string(),
            a.task.as_str().to_string(),
            a.classifier.as_str().to_string(),
            a.folds.to_string(),
            a.runs.to_string(),
        ];
        for m in Metric::ALL {
            rec.push(a.mean.get(m).to_string());
            rec.push(a.std_dev.get(m).to_string());
        }
        w.write_record(rec)?;
    }
    w.flush()
}

/// Mean accuracy of `method` on `task` over every run of the classifiers
/// that learn something (ZeroR is only used when nothing else ran).
fn mean_accuracy(results: &[RunResult], task: Task, method: Method) -> Option<f64> {
    let learners = results
        .iter()
        .any(|r| r.task == task && r.classifier != ModelKind::ZeroR);
    let vals: Vec<f64> = results
        .iter()
        .filter(|r| r.task == task && r.method == method)
        .filter(|r| !learners || r.classifier != ModelKind::ZeroR)
        .map(|r| r.metrics.accuracy)
        .collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Per-task verdict line, e.g. "Requirements: ERRC performed approximately
/// 12% better than the baseline method (mean accuracy 0.912 vs 0.797)".
pub fn winner_line(results: &[RunResult], task: Task) -> Option<String> {
    let errc = mean_accuracy(results, task, Method::Errc)?;
    let base = mean_accuracy(results, task, Method::Baseline)?;
    let pct = ((errc - base).abs() * 100.0).round();
    let verdict = if pct == 0.0 {
        "ERRC and the baseline method performed about the same".to_string()
    } else if errc > base {
        format!("ERRC performed approximately {pct}% better than the baseline method")
    } else {
        format!("the baseline method performed approximately {pct}% better than ERRC")
    };
    Some(format!(
        "{}: {verdict} (mean accuracy {errc:.3} vs {base:.3})",
        task.title()
    ))
}

/// H0 decision per (task, classifier), read off the accuracy cells.
pub fn decision_lines(table: &SignificanceTable) -> Vec<String> {
    table
        .rows
        .iter()
        .filter(|r| r.metric == Metric::Accuracy)
        .map(|r| {
            let verdict = if r.result.significant {
                "reject H0 (ERRC accuracy > baseline)"
            } else {
                "fail to reject H0"
            };
            format!(
                "{} / {}: {verdict}, p = {}",
                r.task.title(),
                r.classifier.title(),
                format_p_value(r.result.p_one_tailed)
            )
        })
        .collect()
}

pub fn summary_text(results: &[RunResult], table: &SignificanceTable) -> String {
    let mut out = String::new();
    let mut runs: Vec<_> = results.iter().map(|r| (r.folds, r.seed)).collect();
    runs.sort_unstable();
    runs.dedup();
    let mut folds: Vec<usize> = runs.iter().map(|r| r.0).collect();
    folds.dedup();
    let fold_list: Vec<String> = folds.iter().map(|k| k.to_string()).collect();
    let _ = writeln!(out, "ERRC vs. baseline keyword features");
    let _ = writeln!(
        out,
        "{} runs over folds {{{}}}",
        results.len(),
        fold_list.join(", ")
    );
    let _ = writeln!(out);
    for task in TABLE_TASKS {
        if let Some(line) = winner_line(results, task) {
            let _ = writeln!(out, "{line}");
        }
    }
    if let Some(first) = table.rows.first() {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "H0: A_ERRC = A_B vs. H1: A_ERRC > A_B ({} one-tailed t-test, alpha = {})",
            first.result.mode, first.result.alpha
        );
        for line in decision_lines(table) {
            let _ = writeln!(out, "  {line}");
        }
        let _ = writeln!(out);
        out.push_str(&render_table(table));
    }
    out
}

/// Writes `results.csv`, `aggregate.csv`, `stats.csv` and `summary.txt`
/// into `out_dir`.
pub fn emit_summary(
    results: &[RunResult],
    table: &SignificanceTable,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    if results.is_empty() {
        return Err(ReportError::NoResults);
    }
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let aggs = aggregate_all(results)?;

    let results_path = out_dir.join("results.csv");
    write_results_csv(&results_path, results).map_err(io_err(&results_path))?;
    let agg_path = out_dir.join("aggregate.csv");
    write_aggregate_csv(&agg_path, &aggs).map_err(io_err(&agg_path))?;
    let stats_path = out_dir.join("stats.csv");
    write_stats_csv(&stats_path, table).map_err(io_err(&stats_path))?;
    let summary_path = out_dir.join("summary.txt");
    fs::write(&summary_path, summary_text(results, table)).map_err(io_err(&summary_path))?;
    Ok(vec![results_path, agg_path, stats_path, summary_path])
}

/// Summary files plus every plot under `out_dir/plots`.
pub fn emit_report(
    results: &[RunResult],
    table: &SignificanceTable,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    let mut written = emit_summary(results, table, out_dir)?;
    let aggs = aggregate_all(results)?;
    for spec in plot_specs(&aggs, &out_dir.join("plots")) {
        written.push(emit_plot(&spec)?);
    }
    Ok(written)
}
