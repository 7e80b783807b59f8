use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::brat::{parse_with_diagnostics, WarningKind};
use crate::corpus::{clean_corpus, load_corpus_dir, CleaningReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationEntry {
    pub stem: String,
    pub severity: Severity,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub files_checked: usize,
    pub entries: Vec<ValidationEntry>,
    /// Entry count per kind, e.g. how many `OffsetMismatch` errors there are.
    pub counts: BTreeMap<String, usize>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.entries.iter().any(|e| e.severity == Severity::Error)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let line = e.line.map(|l| format!(":{l}")).unwrap_or_default();
            let sev = match e.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            out.push_str(&format!("{}{line}: {sev}[{}]: {}\n", e.stem, e.kind, e.message));
        }
        out.push_str(&format!("{} snippets checked, {} findings\n", self.files_checked, self.entries.len()));
        for (k, n) in &self.counts {
            out.push_str(&format!("  {k}: {n}\n"));
        }
        out
    }
}

/// Check every snippet in `corpus_dir` and report all findings without
/// stopping at the first.
pub fn validate(corpus_dir: &Path) -> Result<ValidationReport, PipelineError> {
    let raw = load_corpus_dir(corpus_dir).map_err(|e| PipelineError::io(corpus_dir, e))?;
    let mut report = ValidationReport { files_checked: raw.len(), ..Default::default() };

    let (_, cleaning) = clean_corpus(&raw);
    for entry in &cleaning.entries {
        let (kind, message) = match &entry.reason {
            CleaningReason::Empty => ("EmptyText", "text file is empty".to_string()),
            CleaningReason::Duplicate { of } => ("DuplicateText", format!("text duplicates {of}")),
            CleaningReason::OrphanAnnotation => ("OrphanAnnotation", "annotation file has no text file".to_string()),
            CleaningReason::MissingAnnotation => ("MissingAnnotation", "text file has no annotation file".to_string()),
            // Parse failures are reported in full below.
            CleaningReason::ParseError { .. } => continue,
        };
        report.entries.push(ValidationEntry {
            stem: entry.stem.clone(),
            severity: Severity::Warning,
            kind: kind.to_string(),
            line: None,
            message,
        });
    }

    for entry in &raw {
        let (Some(text), Some(ann)) = (&entry.text, &entry.ann) else {
            continue;
        };
        let diag = parse_with_diagnostics(text, ann, &entry.stem);
        for w in diag.warnings {
            let kind = match w.kind {
                WarningKind::SkippedLine => "SkippedLine",
                WarningKind::DiscontinuousSpan => "DiscontinuousSpan",
            };
            report.entries.push(ValidationEntry {
                stem: entry.stem.clone(),
                severity: Severity::Warning,
                kind: kind.to_string(),
                line: Some(w.line),
                message: w.message,
            });
        }
        for e in diag.errors {
            report.entries.push(ValidationEntry {
                stem: entry.stem.clone(),
                severity: Severity::Error,
                kind: e.kind().to_string(),
                line: None,
                message: e.to_string(),
            });
        }
    }

    report.entries.sort_by(|a, b| a.stem.cmp(&b.stem));
    for e in &report.entries {
        *report.counts.entry(e.kind.clone()).or_default() += 1;
    }
    Ok(report)
}
