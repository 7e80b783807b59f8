//! Samples, datasets and the JSON-lines exchange format.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::markers::{contains_marker, render_marked_text};
use crate::label::RelationLabel;
use crate::text::{char_len, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Anaphor,
    Antecedent,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Anaphor => Role::Antecedent,
            Role::Antecedent => Role::Anaphor,
        }
    }
}

/// One relation between two entities, cut down to its context window.
///
/// `e1` is always the entity that comes first in the text; the roles say
/// which of the two is the anaphor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub sample_id: String,
    pub doc_id: String,
    pub text: String,
    pub e1: Span,
    pub e2: Span,
    pub label: RelationLabel,
    pub e1_role: Role,
    pub e2_role: Role,
    pub noise_tag: String,
}

/// `a` is the first entity relative to `b`: it starts earlier, or starts at
/// the same place and is strictly longer.
pub fn precedes(a: Span, b: Span) -> bool {
    a.start < b.start || (a.start == b.start && a.end > b.end)
}

impl Sample {
    pub fn marked_text(&self) -> String {
        render_marked_text(&self.text, self.e1, self.e2)
    }

    /// Check the structural invariants; returns a reason on failure.
    pub fn check(&self) -> Result<(), String> {
        let n = char_len(&self.text);
        for (name, s) in [("e1", self.e1), ("e2", self.e2)] {
            if s.is_empty() || s.end > n {
                return Err(format!("{name} span {s} is empty or exceeds text length {n}"));
            }
        }
        if !precedes(self.e1, self.e2) {
            return Err(format!("e1 {} does not precede e2 {}", self.e1, self.e2));
        }
        if self.e1_role == self.e2_role {
            return Err("e1 and e2 carry the same role".into());
        }
        if contains_marker(&self.text) {
            return Err("text contains an entity marker literal".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub name: String,
    /// `clean`, `ocr@<wer>` or `ner@<fraction>`, plus derivation steps.
    pub provenance: String,
    pub seed: Option<u64>,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(name: &str, provenance: &str, seed: Option<u64>, samples: Vec<Sample>) -> Dataset {
        Dataset { name: name.to_string(), provenance: provenance.to_string(), seed, samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn stats(&self) -> LabelStats {
        LabelStats::of(&self.samples)
    }
}

/// Per-label counts and proportions in canonical label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub total: usize,
    pub labels: Vec<LabelCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelCount {
    pub label: RelationLabel,
    pub count: usize,
    pub proportion: f64,
}

impl LabelStats {
    pub fn of(samples: &[Sample]) -> LabelStats {
        let mut counts = [0usize; RelationLabel::COUNT];
        for s in samples {
            counts[s.label.index()] += 1;
        }
        let total = samples.len();
        let labels = RelationLabel::ALL
            .iter()
            .map(|&label| {
                let count = counts[label.index()];
                let proportion = if total == 0 { 0.0 } else { count as f64 / total as f64 };
                LabelCount { label, count, proportion }
            })
            .collect();
        LabelStats { total, labels }
    }

    pub fn count(&self, label: RelationLabel) -> usize {
        self.labels[label.index()].count
    }

    pub fn render(&self) -> String {
        let mut out = format!("{:<20} {:>7} {:>9}\n", "label", "count", "share");
        for l in &self.labels {
            out.push_str(&format!("{:<20} {:>7} {:>8.2}%\n", l.label.as_str(), l.count, l.proportion * 100.0));
        }
        out.push_str(&format!("{:<20} {:>7}\n", "total", self.total));
        out
    }
}

/// One line of a dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: String,
    pub doc_id: String,
    pub text: String,
    pub marked_text: String,
    pub e1_start: usize,
    pub e1_end: usize,
    pub e2_start: usize,
    pub e2_end: usize,
    pub label: RelationLabel,
    pub e1_role: Role,
    pub noise_tag: String,
}

impl From<&Sample> for SampleRecord {
    fn from(s: &Sample) -> Self {
        SampleRecord {
            sample_id: s.sample_id.clone(),
            doc_id: s.doc_id.clone(),
            text: s.text.clone(),
            marked_text: s.marked_text(),
            e1_start: s.e1.start,
            e1_end: s.e1.end,
            e2_start: s.e2.start,
            e2_end: s.e2.end,
            label: s.label,
            e1_role: s.e1_role,
            noise_tag: s.noise_tag.clone(),
        }
    }
}

impl SampleRecord {
    pub fn into_sample(self) -> Result<Sample, String> {
        let sample = Sample {
            sample_id: self.sample_id,
            doc_id: self.doc_id,
            text: self.text,
            e1: Span::new(self.e1_start, self.e1_end),
            e2: Span::new(self.e2_start, self.e2_end),
            label: self.label,
            e1_role: self.e1_role,
            e2_role: self.e1_role.other(),
            noise_tag: self.noise_tag,
        };
        sample.check()?;
        if sample.marked_text() != self.marked_text {
            return Err("marked_text disagrees with text and spans".into());
        }
        Ok(sample)
    }
}

/// Sidecar written next to each dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub name: String,
    pub provenance: String,
    pub seed: Option<u64>,
    pub stats: LabelStats,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {source}")]
    Json { path: PathBuf, line: usize, source: serde_json::Error },
    #[error("{path}:{line}: invalid sample: {reason}")]
    Invalid { path: PathBuf, line: usize, reason: String },
    #[error("{path}:{line}: duplicate sample_id {id}")]
    DuplicateId { path: PathBuf, line: usize, id: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io { path: path.to_path_buf(), source }
}

pub fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

/// Serialize samples as JSON lines (LF endings, trailing newline).
pub fn to_jsonl(samples: &[Sample]) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&serde_json::to_string(&SampleRecord::from(s)).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Write `<path>` and its `.meta` sidecar.
pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<(), DatasetError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    w.write_all(to_jsonl(&dataset.samples).as_bytes()).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))?;

    let meta = DatasetMeta {
        name: dataset.name.clone(),
        provenance: dataset.provenance.clone(),
        seed: dataset.seed,
        stats: dataset.stats(),
    };
    let mp = meta_path(path);
    let mut body = serde_json::to_string_pretty(&meta).expect("meta serializes");
    body.push('\n');
    fs::write(&mp, body).map_err(io_err(&mp))
}

/// Read a dataset file. The `.meta` sidecar is used for name and provenance
/// when present.
pub fn read_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut samples = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SampleRecord = serde_json::from_str(&line).map_err(|source| DatasetError::Json {
            path: path.to_path_buf(),
            line: line_no,
            source,
        })?;
        let sample = rec.into_sample().map_err(|reason| DatasetError::Invalid {
            path: path.to_path_buf(),
            line: line_no,
            reason,
        })?;
        if !seen.insert(sample.sample_id.clone()) {
            return Err(DatasetError::DuplicateId { path: path.to_path_buf(), line: line_no, id: sample.sample_id });
        }
        samples.push(sample);
    }

    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let meta: Option<DatasetMeta> =
        fs::read_to_string(meta_path(path)).ok().and_then(|s| serde_json::from_str(&s).ok());
    Ok(match meta {
        Some(m) => Dataset { name: m.name, provenance: m.provenance, seed: m.seed, samples },
        None => Dataset { name: stem, provenance: "unknown".into(), seed: None, samples },
    })
}
