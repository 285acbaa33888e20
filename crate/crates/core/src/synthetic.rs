//! A generated stand-in corpus with known structure.
//!
//! 200 documents spread over two conferences and three years each, with
//! label proportions shaped like a real RE/testing venue mix. Every document
//! shares five high-frequency filler terms whose counts ignore the labels,
//! so keywords derived from term frequency are uninformative. Each document
//! also carries mid-frequency vocabulary planted according to its labels,
//! which lands in the ten top-ranked stems. Low-count noise words, stop
//! words, digits and punctuation exercise the text pipeline.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{write_manifest, Document};
use crate::textprep::StopList;

pub const DEFAULT_SEED: u64 = 7;

/// Probability that a document carries the vocabulary of the opposite
/// label, per task.
pub const VOCABULARY_NOISE: f64 = 0.06;

/// (conference, year, documents, empirical, RE).
pub const LAYOUT: [(&str, i32, usize, usize, usize); 6] = [
    ("RE", 2000, 14, 7, 13),
    ("RE", 2005, 45, 22, 42),
    ("RE", 2015, 48, 30, 44),
    ("ISSTA", 2000, 21, 12, 1),
    ("ISSTA", 2004, 29, 11, 1),
    ("ISSTA", 2015, 43, 22, 0),
];

/// A planted term: its Porter stem and the surface forms written into text.
pub struct Term {
    pub stem: &'static str,
    pub forms: &'static [&'static str],
}

const fn term(stem: &'static str, forms: &'static [&'static str]) -> Term {
    Term { stem, forms }
}

pub const FILLERS: [Term; 5] = [
    term("system", &["system", "systems"]),
    term("approach", &["approach", "approaches"]),
    term("result", &["result", "results"]),
    term("model", &["model", "models"]),
    term("process", &["process", "processes"]),
];

pub const RE_TERMS: [Term; 3] = [
    term("requir", &["requirements", "requirement", "required"]),
    term("stakehold", &["stakeholders", "stakeholder"]),
    term("elicit", &["elicitation", "elicit"]),
];

pub const NON_RE_TERMS: [Term; 3] = [
    term("test", &["testing", "tests", "test"]),
    term("coverag", &["coverage"]),
    term("mutat", &["mutation", "mutations"]),
];

pub const EMPIRICAL_TERMS: [Term; 2] = [
    term("experi", &["experiment", "experiments"]),
    term("particip", &["participants", "participant"]),
];

pub const NON_EMPIRICAL_TERMS: [Term; 2] = [
    term("formal", &["formalism", "formal"]),
    term("theorem", &["theorem", "theorems"]),
];

const SYLLABLES: [&str; 12] = [
    "ka", "lo", "mi", "ne", "su", "ta", "vo", "ri", "pe", "do", "gu", "zai",
];
const PUNCTUATION: [&str; 6] = [",", ";", ":", " (", ")", " --"];

fn noise_vocabulary() -> Vec<String> {
    let mut words = Vec::new();
    for a in SYLLABLES {
        for b in SYLLABLES {
            for c in ["n", "l", "r"] {
                words.push(format!("{a}{b}{c}"));
            }
        }
    }
    words
}

/// One generated document: metadata plus its text.
#[derive(Debug, Clone)]
pub struct SyntheticDoc {
    pub id: String,
    pub conference: &'static str,
    pub year: i32,
    pub re_label: bool,
    pub empirical_label: bool,
    pub text: String,
}

fn pick_labels(rng: &mut ChaCha8Rng, n: usize, positives: usize) -> Vec<bool> {
    let mut v: Vec<bool> = (0..n).map(|i| i < positives).collect();
    v.shuffle(rng);
    v
}

fn push_term(bag: &mut Vec<String>, rng: &mut ChaCha8Rng, t: &Term, count: u32) {
    for _ in 0..count {
        bag.push(t.forms[rng.gen_range(0..t.forms.len())].to_string());
    }
}

fn render(rng: &mut ChaCha8Rng, mut bag: Vec<String>) -> String {
    bag.shuffle(rng);
    let mut text = String::new();
    let mut words = bag.into_iter().peekable();
    while words.peek().is_some() {
        let len = rng.gen_range(8..16);
        let sentence: Vec<String> = words.by_ref().take(len).collect();
        for (i, w) in sentence.iter().enumerate() {
            if i == 0 {
                let mut cs = w.chars();
                if let Some(c) = cs.next() {
                    text.extend(c.to_uppercase());
                    text.push_str(cs.as_str());
                }
            } else {
                text.push(' ');
                text.push_str(w);
            }
            if i + 1 < sentence.len() && rng.gen_bool(0.08) {
                text.push_str(PUNCTUATION[rng.gen_range(0..PUNCTUATION.len())]);
            }
            if rng.gen_bool(0.03) {
                let _ = write!(text, " {}", rng.gen_range(1..2020));
            }
        }
        text.push('.');
        text.push(if rng.gen_bool(0.2) { '\n' } else { ' ' });
    }
    text
}

/// Generates the documents. Output is a pure function of `seed`.
pub fn documents(seed: u64) -> Vec<SyntheticDoc> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = noise_vocabulary();
    let mut stops: Vec<String> = StopList::builtin().iter().map(String::from).collect();
    stops.truncate(40);

    let mut docs = Vec::new();
    for (conference, year, n, empirical, re) in LAYOUT {
        let emp_labels = pick_labels(&mut rng, n, empirical);
        let re_labels = pick_labels(&mut rng, n, re);
        for i in 0..n {
            let (re_label, empirical_label) = (re_labels[i], emp_labels[i]);
            let mut bag = Vec::new();
            for t in &FILLERS {
                let c = rng.gen_range(10..=14);
                push_term(&mut bag, &mut rng, t, c);
            }
            let re_side = re_label != rng.gen_bool(VOCABULARY_NOISE);
            for t in if re_side { &RE_TERMS } else { &NON_RE_TERMS } {
                let c = rng.gen_range(6..=8);
                push_term(&mut bag, &mut rng, t, c);
            }
            let emp_side = empirical_label != rng.gen_bool(VOCABULARY_NOISE);
            for t in if emp_side {
                &EMPIRICAL_TERMS
            } else {
                &NON_EMPIRICAL_TERMS
            } {
                let c = rng.gen_range(3..=5);
                push_term(&mut bag, &mut rng, t, c);
            }
            let n_noise = rng.gen_range(30..60);
            for w in noise.choose_multiple(&mut rng, n_noise) {
                for _ in 0..rng.gen_range(1..=2) {
                    bag.push(w.clone());
                }
            }
            for _ in 0..rng.gen_range(40..80) {
                bag.push(stops[rng.gen_range(0..stops.len())].clone());
            }
            docs.push(SyntheticDoc {
                id: format!("{}-{year}-{:02}", conference.to_lowercase(), i + 1),
                conference,
                year,
                re_label,
                empirical_label,
                text: render(&mut rng, bag),
            });
        }
    }
    docs
}

/// Writes `papers/<id>.txt` and `manifest.csv` under `dir`; returns the
/// manifest path.
pub fn write_corpus(dir: &Path, seed: u64) -> std::io::Result<PathBuf> {
    let papers = dir.join("papers");
    fs::create_dir_all(&papers)?;
    let mut manifest_rows = Vec::new();
    for d in documents(seed) {
        let rel = PathBuf::from("papers").join(format!("{}.txt", d.id));
        fs::write(dir.join(&rel), &d.text)?;
        manifest_rows.push(Document {
            id: d.id,
            path: rel,
            conference: d.conference.to_string(),
            year: d.year,
            re_label: d.re_label,
            empirical_label: d.empirical_label,
        });
    }
    let manifest = dir.join("manifest.csv");
    write_manifest(&manifest, &manifest_rows)?;
    Ok(manifest)
}
