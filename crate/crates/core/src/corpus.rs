//! Labeled corpus loading from a CSV manifest, label accounting, and file
//! validation.

use std::collections::{BTreeMap, HashSet};
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact header a manifest must start with.
pub const MANIFEST_HEADER: [&str; 6] = [
    "id",
    "path",
    "conference",
    "year",
    "re_label",
    "empirical_label",
];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot open manifest {path}: {source}")]
    Open {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest header must be `{}`, found `{found}`", MANIFEST_HEADER.join(","))]
    Header { found: String },
    #[error("manifest row {row}: {reason}")]
    Row { row: u64, reason: String },
    #[error("manifest row {row}: duplicate id {id:?}")]
    DuplicateId { row: u64, id: String },
    #[error("manifest row {row}: {field} value {value:?} is not one of 0/1/true/false")]
    Label {
        row: u64,
        field: &'static str,
        value: String,
    },
    #[error("empty corpus")]
    Empty,
}

/// One paper: identity, location of its extracted text, and its two labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub path: PathBuf,
    pub conference: String,
    pub year: i32,
    pub re_label: bool,
    pub empirical_label: bool,
}

impl Document {
    pub fn read_text(&self) -> std::io::Result<String> {
        std::fs::read_to_string(&self.path)
    }
}

/// Documents in manifest order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub source_manifest: PathBuf,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }
}

fn parse_label(raw: &str, row: u64, field: &'static str) -> Result<bool, CorpusError> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        _ => Err(CorpusError::Label {
            row,
            field,
            value: raw.to_string(),
        }),
    }
}

/// Reads a manifest. Relative document paths resolve against the manifest's
/// directory. File existence is not checked here; see [`validate`].
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| CorpusError::Open {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let header = reader.headers().map_err(|e| CorpusError::Header {
        found: e.to_string(),
    })?;
    if header.iter().ne(MANIFEST_HEADER.iter().copied()) {
        return Err(CorpusError::Header {
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut documents = Vec::new();
    let mut seen = HashSet::new();
    for (idx, record) in reader.records().enumerate() {
        // Data rows are numbered from 1; the header is row 0.
        let row = idx as u64 + 1;
        let record = record.map_err(|e| CorpusError::Row {
            row,
            reason: e.to_string(),
        })?;
        if record.len() != MANIFEST_HEADER.len() {
            return Err(CorpusError::Row {
                row,
                reason: format!(
                    "expected {} fields, found {}",
                    MANIFEST_HEADER.len(),
                    record.len()
                ),
            });
        }
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(CorpusError::Row {
                row,
                reason: "empty id".into(),
            });
        }
        if record[1].is_empty() {
            return Err(CorpusError::Row {
                row,
                reason: "empty path".into(),
            });
        }
        let year = record[3].parse::<i32>().map_err(|_| CorpusError::Row {
            row,
            reason: format!("year {:?} is not an integer", &record[3]),
        })?;
        let re_label = parse_label(&record[4], row, "re_label")?;
        let empirical_label = parse_label(&record[5], row, "empirical_label")?;
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId { row, id });
        }
        documents.push(Document {
            id,
            path: base.join(&record[1]),
            conference: record[2].to_string(),
            year,
            re_label,
            empirical_label,
        });
    }
    if documents.is_empty() {
        return Err(CorpusError::Empty);
    }
    Ok(Corpus {
        documents,
        source_manifest: path.to_path_buf(),
    })
}

/// Writes a manifest for `documents`, storing paths relative to the
/// manifest's directory when they live under it.
pub fn write_manifest(path: impl AsRef<Path>, documents: &[Document]) -> std::io::Result<()> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(MANIFEST_HEADER)?;
    for d in documents {
        let rel = d.path.strip_prefix(base).unwrap_or(&d.path);
        w.write_record([
            d.id.as_str(),
            &rel.to_string_lossy(),
            &d.conference,
            &d.year.to_string(),
            if d.re_label { "1" } else { "0" },
            if d.empirical_label { "1" } else { "0" },
        ])?;
    }
    w.flush()
}

/// Label counts for one group of documents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub empirical: usize,
    pub non_empirical: usize,
    pub re: usize,
    pub non_re: usize,
    pub total: usize,
}

impl LabelCounts {
    fn add(&mut self, d: &Document) {
        if d.empirical_label {
            self.empirical += 1;
        } else {
            self.non_empirical += 1;
        }
        if d.re_label {
            self.re += 1;
        } else {
            self.non_re += 1;
        }
        self.total += 1;
    }

    fn absorb(&mut self, other: &LabelCounts) {
        self.empirical += other.empirical;
        self.non_empirical += other.non_empirical;
        self.re += other.re;
        self.non_re += other.non_re;
        self.total += other.total;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub conference: String,
    pub year: i32,
    pub counts: LabelCounts,
}

/// Per (conference, year) label counts plus grand totals.
///
/// Conferences are listed in order of first appearance, years ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSummary {
    pub rows: Vec<SummaryRow>,
    pub totals: LabelCounts,
}

impl LabelSummary {
    pub fn empirical_share(&self) -> f64 {
        self.totals.empirical as f64 / self.totals.total as f64
    }

    pub fn re_share(&self) -> f64 {
        self.totals.re as f64 / self.totals.total as f64
    }
}

pub fn summarize(corpus: &Corpus) -> Result<LabelSummary, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::Empty);
    }
    let mut conference_order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<(&str, i32), LabelCounts> = BTreeMap::new();
    for d in &corpus.documents {
        if !conference_order.contains(&d.conference.as_str()) {
            conference_order.push(&d.conference);
        }
        groups.entry((&d.conference, d.year)).or_default().add(d);
    }
    let mut rows = Vec::with_capacity(groups.len());
    let mut totals = LabelCounts::default();
    for conf in conference_order {
        for ((_, year), counts) in groups.range((conf, i32::MIN)..=(conf, i32::MAX)) {
            totals.absorb(counts);
            rows.push(SummaryRow {
                conference: conf.to_string(),
                year: *year,
                counts: *counts,
            });
        }
    }
    Ok(LabelSummary { rows, totals })
}

fn pct(part: usize, total: usize) -> String {
    format!("{part} ({:.0}%)", 100.0 * part as f64 / total as f64)
}

impl fmt::Display for LabelSummary {
    /// Tab-separated grid, one block per conference, grand totals last.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(out, "Year\tEmpirical\tNon-Empirical\tRE\tNon-RE\tTotal")?;
        let mut current: Option<&str> = None;
        for row in &self.rows {
            if current != Some(row.conference.as_str()) {
                writeln!(out, "{}", row.conference)?;
                current = Some(&row.conference);
            }
            let c = &row.counts;
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                row.year, c.empirical, c.non_empirical, c.re, c.non_re, c.total
            )?;
        }
        let t = &self.totals;
        writeln!(
            out,
            "Total\t{}\t{}\t{}\t{}\t{}",
            pct(t.empirical, t.total),
            pct(t.non_empirical, t.total),
            pct(t.re, t.total),
            pct(t.non_re, t.total),
            pct(t.total, t.total)
        )?;
        f.write_str(&out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub doc_id: String,
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.issues.iter().any(|i| i.severity == Severity::Error)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return writeln!(f, "OK");
        }
        for i in &self.issues {
            let sev = match i.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            writeln!(f, "{sev}: {}: {}", i.doc_id, i.message)?;
        }
        Ok(())
    }
}

/// Checks every document file. Problems are reported, never raised.
pub fn validate(corpus: &Corpus) -> ValidationReport {
    let mut issues = Vec::new();
    let mut seen = HashSet::new();
    for d in &corpus.documents {
        if !seen.insert(d.id.as_str()) {
            issues.push(Issue {
                doc_id: d.id.clone(),
                severity: Severity::Error,
                message: "duplicate id".into(),
            });
        }
        match d.read_text() {
            Ok(text) if text.trim().is_empty() => issues.push(Issue {
                doc_id: d.id.clone(),
                severity: Severity::Warning,
                message: "document has no text".into(),
            }),
            Ok(_) => {}
            Err(e) => issues.push(Issue {
                doc_id: d.id.clone(),
                severity: Severity::Error,
                message: format!("unreadable file {}: {e}", d.path.display()),
            }),
        }
    }
    ValidationReport { issues }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p)
            .unwrap()
            .write_all(body.as_bytes())
            .unwrap();
        p
    }

    const HEADER: &str = "id,path,conference,year,re_label,empirical_label\n";

    #[test]
    fn empty_manifest_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let m = write(dir.path(), "m.csv", HEADER);
        assert!(matches!(load_manifest(&m), Err(CorpusError::Empty)));
    }

    #[test]
    fn bad_label_names_row() {
        let dir = tempfile::tempdir().unwrap();
        let m = write(
            dir.path(),
            "m.csv",
            &format!("{HEADER}a,a.txt,RE,2000,1,0\nb,b.txt,RE,2000,maybe,0\n"),
        );
        let err = load_manifest(&m).unwrap_err();
        assert!(matches!(err, CorpusError::Label { row: 2, .. }), "{err}");
        assert!(err.to_string().contains("row 2"));
    }

    #[test]
    fn header_duplicates_and_short_rows() {
        let dir = tempfile::tempdir().unwrap();
        let m = write(dir.path(), "h.csv", "id,file,conf,year,re,emp\n");
        assert!(matches!(load_manifest(&m), Err(CorpusError::Header { .. })));

        let m = write(
            dir.path(),
            "d.csv",
            &format!("{HEADER}a,a.txt,RE,2000,1,0\na,b.txt,RE,2000,TRUE,False\n"),
        );
        assert!(matches!(
            load_manifest(&m),
            Err(CorpusError::DuplicateId { row: 2, .. })
        ));

        let m = write(dir.path(), "s.csv", &format!("{HEADER}a,a.txt,RE\n"));
        assert!(matches!(
            load_manifest(&m),
            Err(CorpusError::Row { row: 1, .. })
        ));

        assert!(matches!(
            load_manifest(dir.path().join("nope.csv")),
            Err(CorpusError::Open { .. })
        ));
    }

    #[test]
    fn paths_resolve_against_manifest_dir_and_order_is_kept() {
        let dir = tempfile::tempdir().unwrap();
        let m = write(
            dir.path(),
            "m.csv",
            &format!("{HEADER}z,texts/z.txt,ISSTA,2004,0,1\na,a.txt,RE,2000,true,FALSE\n"),
        );
        let c = load_manifest(&m).unwrap();
        let ids: Vec<_> = c.documents.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["z", "a"]);
        assert_eq!(c.documents[0].path, dir.path().join("texts/z.txt"));
        assert!(c.documents[1].re_label && !c.documents[1].empirical_label);
    }

    #[test]
    fn validate_reports_missing_and_empty() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.txt", "some text");
        write(dir.path(), "e.txt", "");
        let m = write(
            dir.path(),
            "m.csv",
            &format!("{HEADER}a,a.txt,RE,2000,1,1\nb,missing.txt,RE,2000,1,1\n"),
        );
        let c = load_manifest(&m).unwrap();
        let report = validate(&c);
        assert_eq!(report.issues.len(), 1);
        assert_eq!(report.issues[0].doc_id, "b");
        assert_eq!(report.issues[0].severity, Severity::Error);

        let m = write(
            dir.path(),
            "ok.csv",
            &format!("{HEADER}a,a.txt,RE,2000,1,1\n"),
        );
        assert!(validate(&load_manifest(&m).unwrap()).is_ok());

        let m = write(
            dir.path(),
            "e.csv",
            &format!("{HEADER}e,e.txt,RE,2000,1,1\n"),
        );
        let report = validate(&load_manifest(&m).unwrap());
        assert_eq!(report.issues.len(), 1);
        assert_eq!(report.issues[0].severity, Severity::Warning);
        assert_eq!(report.issues[0].message, "document has no text");
    }

    #[test]
    fn single_document_summary() {
        let c = Corpus {
            documents: vec![Document {
                id: "x".into(),
                path: "x.txt".into(),
                conference: "RE".into(),
                year: 2015,
                re_label: true,
                empirical_label: true,
            }],
            source_manifest: "m.csv".into(),
        };
        let s = summarize(&c).unwrap();
        assert_eq!(
            s.totals,
            LabelCounts {
                empirical: 1,
                non_empirical: 0,
                re: 1,
                non_re: 0,
                total: 1
            }
        );
        let empty = Corpus {
            documents: vec![],
            source_manifest: "m.csv".into(),
        };
        assert!(matches!(summarize(&empty), Err(CorpusError::Empty)));
    }
}
