//! Per-class precision, recall and F1, macro F1 and confusion matrices.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Dataset;
use crate::label::RelationLabel;

const K: usize = RelationLabel::COUNT;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {reason}")]
    Format { path: PathBuf, line: usize, reason: String },
    #[error("{path}:{line}: unknown label {label:?}")]
    UnknownLabel { path: PathBuf, line: usize, label: String },
    #[error("{path}:{line}: duplicate prediction for {id}")]
    DuplicateId { path: PathBuf, line: usize, id: String },
    #[error("predictions do not cover the gold set: {missing} missing (e.g. {missing_example:?}), {extra} extra (e.g. {extra_example:?})")]
    CoverageMismatch { missing: usize, missing_example: Option<String>, extra: usize, extra_example: Option<String> },
    #[error("cannot aggregate zero reports")]
    EmptyAggregate,
    #[error("{0}")]
    Dataset(#[from] crate::corpus::DatasetError),
}

/// Predicted labels keyed by sample id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PredictionSet {
    pub source_tag: String,
    pub entries: BTreeMap<String, RelationLabel>,
}

#[derive(Deserialize)]
struct PredictionRecord {
    sample_id: String,
    label: String,
}

impl PredictionSet {
    pub fn from_pairs<I, S>(source_tag: &str, pairs: I) -> PredictionSet
    where
        I: IntoIterator<Item = (S, RelationLabel)>,
        S: Into<String>,
    {
        PredictionSet {
            source_tag: source_tag.to_string(),
            entries: pairs.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    /// Read a predictions file: one `{"sample_id": ..., "label": ...}` per line.
    pub fn read(path: &Path) -> Result<PredictionSet, EvalError> {
        let io = |source| EvalError::Io { path: path.to_path_buf(), source };
        let file = File::open(path).map_err(io)?;
        let mut entries = BTreeMap::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: PredictionRecord = serde_json::from_str(&line).map_err(|e| EvalError::Format {
                path: path.to_path_buf(),
                line: line_no,
                reason: e.to_string(),
            })?;
            let label = rec.label.parse().map_err(|_| EvalError::UnknownLabel {
                path: path.to_path_buf(),
                line: line_no,
                label: rec.label.clone(),
            })?;
            if entries.insert(rec.sample_id.clone(), label).is_some() {
                return Err(EvalError::DuplicateId { path: path.to_path_buf(), line: line_no, id: rec.sample_id });
            }
        }
        let source_tag = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Ok(PredictionSet { source_tag, entries })
    }

    /// Serialize in sample-id order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (id, label) in &self.entries {
            let rec = serde_json::json!({ "sample_id": id, "label": label });
            out.push_str(&rec.to_string());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: RelationLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_class: Vec<ClassMetrics>,
    /// Unweighted mean of the five per-class F1 scores, absent classes
    /// included.
    pub macro_f1: f64,
    /// Rows are gold labels, columns predicted labels.
    pub confusion: [[usize; K]; K],
    pub n: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Build a report from a confusion matrix.
pub fn report_from_confusion(confusion: [[usize; K]; K]) -> MetricsReport {
    let n = confusion.iter().flatten().sum();
    let per_class: Vec<ClassMetrics> = RelationLabel::ALL
        .iter()
        .map(|&label| {
            let c = label.index();
            let tp = confusion[c][c];
            let support: usize = confusion[c].iter().sum();
            let predicted: usize = (0..K).map(|r| confusion[r][c]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            ClassMetrics { label, precision, recall, f1, support }
        })
        .collect();
    let macro_f1 = per_class.iter().map(|m| m.f1).sum::<f64>() / K as f64;
    MetricsReport { per_class, macro_f1, confusion, n }
}

/// Score `(gold, predicted)` label pairs.
pub fn score_labels<I: IntoIterator<Item = (RelationLabel, RelationLabel)>>(pairs: I) -> MetricsReport {
    let mut confusion = [[0usize; K]; K];
    for (g, p) in pairs {
        confusion[g.index()][p.index()] += 1;
    }
    report_from_confusion(confusion)
}

/// Score predictions against a gold dataset. The prediction ids must match
/// the gold ids exactly.
pub fn score(gold: &Dataset, preds: &PredictionSet) -> Result<MetricsReport, EvalError> {
    let missing: Vec<&str> =
        gold.samples.iter().map(|s| s.sample_id.as_str()).filter(|id| !preds.entries.contains_key(*id)).collect();
    let gold_ids: std::collections::HashSet<&str> = gold.samples.iter().map(|s| s.sample_id.as_str()).collect();
    let extra: Vec<&str> = preds.entries.keys().map(String::as_str).filter(|id| !gold_ids.contains(id)).collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(EvalError::CoverageMismatch {
            missing: missing.len(),
            missing_example: missing.first().map(|s| s.to_string()),
            extra: extra.len(),
            extra_example: extra.first().map(|s| s.to_string()),
        });
    }
    Ok(score_labels(gold.samples.iter().map(|s| (s.label, preds.entries[&s.sample_id]))))
}

impl MetricsReport {
    /// Per-class table followed by the macro average.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<20} {:>9} {:>9} {:>9} {:>8}", "label", "precision", "recall", "f1", "support");
        for m in &self.per_class {
            let _ = writeln!(
                out,
                "{:<20} {:>9.3} {:>9.3} {:>9.3} {:>8}",
                m.label.as_str(),
                m.precision,
                m.recall,
                m.f1,
                m.support
            );
        }
        let mean = |f: fn(&ClassMetrics) -> f64| self.per_class.iter().map(f).sum::<f64>() / K as f64;
        let _ = writeln!(
            out,
            "{:<20} {:>9.3} {:>9.3} {:>9.3} {:>8}",
            "macro-average",
            mean(|m| m.precision),
            mean(|m| m.recall),
            self.macro_f1,
            self.n
        );
        out
    }
}

/// Render the confusion matrix, either as counts or as row-normalized
/// shares. Rows without gold samples render as zeros and are footnoted.
pub fn confusion_render(report: &MetricsReport, normalize: bool) -> String {
    let short = ["CONT", "COREF", "R_ASSOC", "TRANS", "WORK_UP"];
    let mut out = format!("{:<22}", "gold \\ predicted");
    for s in short {
        let _ = write!(out, "{s:>9}");
    }
    out.push('\n');
    let mut empty_rows = false;
    for (r, label) in RelationLabel::ALL.iter().enumerate() {
        let row = report.confusion[r];
        let total: usize = row.iter().sum();
        let mark = if total == 0 {
            empty_rows = true;
            "*"
        } else {
            ""
        };
        let _ = write!(out, "{:<22}", format!("{}{}", label.as_str(), mark));
        for &v in &row {
            if normalize {
                let _ = write!(out, "{:>9.3}", normalized_cell(v, total));
            } else {
                let _ = write!(out, "{v:>9}");
            }
        }
        out.push('\n');
    }
    if empty_rows {
        out.push_str("* no gold samples for this class\n");
    }
    out
}

fn normalized_cell(v: usize, total: usize) -> f64 {
    ratio(v, total)
}

/// Row-normalized confusion matrix; zero-support rows are all zeros.
pub fn normalized_confusion(report: &MetricsReport) -> [[f64; K]; K] {
    let mut out = [[0.0; K]; K];
    for (r, row) in report.confusion.iter().enumerate() {
        let total: usize = row.iter().sum();
        for (c, &v) in row.iter().enumerate() {
            out[r][c] = normalized_cell(v, total);
        }
    }
    out
}

/// Summary of macro F1 across runs or folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single run.
    pub std: f64,
    /// False when there was only one run and `std` is a placeholder.
    pub std_defined: bool,
}

pub fn aggregate_values(values: &[f64]) -> Result<Aggregate, EvalError> {
    if values.is_empty() {
        return Err(EvalError::EmptyAggregate);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (std, std_defined) = if n > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        ((ss / (n - 1) as f64).sqrt(), true)
    } else {
        (0.0, false)
    };
    Ok(Aggregate { runs: n, mean, min, max, std, std_defined })
}

pub fn aggregate(reports: &[MetricsReport]) -> Result<Aggregate, EvalError> {
    let values: Vec<f64> = reports.iter().map(|r| r.macro_f1).collect();
    aggregate_values(&values)
}
