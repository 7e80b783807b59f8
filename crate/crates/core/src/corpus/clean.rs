//! Corpus loading and cleaning.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::brat::{parse_document, BratError, Document, ParseWarning};

/// The files found for one stem. Either side may be missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEntry {
    pub stem: String,
    pub text: Option<String>,
    pub ann: Option<String>,
}

/// Read every top-level `*.txt` / `*.ann` file in `dir`, grouped by stem and
/// sorted by stem.
pub fn load_corpus_dir(dir: &Path) -> io::Result<Vec<RawEntry>> {
    let mut by_stem: BTreeMap<String, RawEntry> = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if !path.is_file() {
            continue;
        }
        let (Some(stem), Some(ext)) = (path.file_stem(), path.extension()) else {
            continue;
        };
        let stem = stem.to_string_lossy().into_owned();
        let slot = by_stem.entry(stem.clone()).or_insert_with(|| RawEntry { stem, text: None, ann: None });
        match ext.to_str() {
            Some("txt") => slot.text = Some(fs::read_to_string(&path)?),
            Some("ann") => slot.ann = Some(fs::read_to_string(&path)?),
            _ => {}
        }
    }
    // Stems that only had unrelated extensions.
    by_stem.retain(|_, e| e.text.is_some() || e.ann.is_some());
    Ok(by_stem.into_values().collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum CleaningReason {
    /// The text file is empty or whitespace only.
    Empty,
    /// Same text content as an earlier stem.
    Duplicate { of: String },
    /// An annotation file without a text file.
    OrphanAnnotation,
    /// A text file without an annotation file; kept with no annotations.
    MissingAnnotation,
    /// The pair failed to parse.
    ParseError { error: BratError },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningEntry {
    pub stem: String,
    pub removed: bool,
    #[serde(flatten)]
    pub reason: CleaningReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CleaningReport {
    pub input_stems: usize,
    pub retained: usize,
    pub entries: Vec<CleaningEntry>,
    pub warnings: Vec<(String, ParseWarning)>,
}

impl CleaningReport {
    pub fn removed(&self) -> impl Iterator<Item = &CleaningEntry> {
        self.entries.iter().filter(|e| e.removed)
    }

    pub fn count_removed(&self, pred: impl Fn(&CleaningReason) -> bool) -> usize {
        self.removed().filter(|e| pred(&e.reason)).count()
    }
}

/// Drop empty, duplicate, orphaned and unparseable snippets.
///
/// Duplicates are exact text matches; the lexicographically first stem is
/// kept. Entries are processed in stem order, so the outcome does not depend
/// on the order of `raw`.
pub fn clean_corpus(raw: &[RawEntry]) -> (Vec<Document>, CleaningReport) {
    let mut sorted: Vec<&RawEntry> = raw.iter().collect();
    sorted.sort_by(|a, b| a.stem.cmp(&b.stem));

    let mut report = CleaningReport { input_stems: sorted.len(), ..Default::default() };
    let mut first_with_text: HashMap<&str, &str> = HashMap::new();
    let mut documents = Vec::new();

    let remove = |report: &mut CleaningReport, stem: &str, reason| {
        report.entries.push(CleaningEntry { stem: stem.to_string(), removed: true, reason });
    };

    for entry in sorted {
        let Some(text) = entry.text.as_deref() else {
            remove(&mut report, &entry.stem, CleaningReason::OrphanAnnotation);
            continue;
        };
        if text.trim().is_empty() {
            remove(&mut report, &entry.stem, CleaningReason::Empty);
            continue;
        }
        if let Some(of) = first_with_text.get(text) {
            remove(&mut report, &entry.stem, CleaningReason::Duplicate { of: of.to_string() });
            continue;
        }
        first_with_text.insert(text, &entry.stem);

        let ann = match entry.ann.as_deref() {
            Some(a) => a,
            None => {
                report.entries.push(CleaningEntry {
                    stem: entry.stem.clone(),
                    removed: false,
                    reason: CleaningReason::MissingAnnotation,
                });
                ""
            }
        };
        match parse_document(text, ann, &entry.stem) {
            Ok(parsed) => {
                report.warnings.extend(parsed.warnings.into_iter().map(|w| (entry.stem.clone(), w)));
                documents.push(parsed.document);
            }
            Err(error) => remove(&mut report, &entry.stem, CleaningReason::ParseError { error }),
        }
    }
    report.retained = documents.len();
    (documents, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(stem: &str, text: Option<&str>, ann: Option<&str>) -> RawEntry {
        RawEntry { stem: stem.into(), text: text.map(Into::into), ann: ann.map(Into::into) }
    }

    #[test]
    fn clean_corpus_passes_through() {
        let raw = vec![entry("a", Some("Alpha."), Some("")), entry("b", Some("Beta."), Some(""))];
        let (docs, report) = clean_corpus(&raw);
        assert_eq!(docs.len(), 2);
        assert!(report.entries.is_empty());
        assert_eq!(report.retained, 2);
    }

    #[test]
    fn removes_empty_duplicate_and_orphans() {
        let raw = vec![
            entry("d", Some("Same text."), Some("")),
            entry("a", Some(""), Some("")),
            entry("c", Some("Same text."), Some("")),
            entry("e", None, Some("T1\tENTITY 0 1\tx\n")),
            entry("f", Some("Fine."), Some("")),
        ];
        let (docs, report) = clean_corpus(&raw);
        let kept: Vec<&str> = docs.iter().map(|d| d.doc_id.as_str()).collect();
        assert_eq!(kept, vec!["c", "f"]);
        assert_eq!(report.input_stems, 5);
        assert_eq!(
            report.entries,
            vec![
                CleaningEntry { stem: "a".into(), removed: true, reason: CleaningReason::Empty },
                CleaningEntry { stem: "d".into(), removed: true, reason: CleaningReason::Duplicate { of: "c".into() } },
                CleaningEntry { stem: "e".into(), removed: true, reason: CleaningReason::OrphanAnnotation },
            ]
        );
    }

    #[test]
    fn unparseable_pairs_become_report_entries() {
        let raw = vec![entry("a", Some("abc"), Some("T1\tENTITY 0 2\tzz\n"))];
        let (docs, report) = clean_corpus(&raw);
        assert!(docs.is_empty());
        assert!(matches!(report.entries[0].reason, CleaningReason::ParseError { .. }));
    }

    #[test]
    fn text_without_annotations_is_kept_and_noted() {
        let (docs, report) = clean_corpus(&[entry("a", Some("abc"), None)]);
        assert_eq!(docs.len(), 1);
        assert!(!report.entries[0].removed);
    }

    #[test]
    fn loads_directory_by_stem() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("x.txt"), "hello").unwrap();
        fs::write(dir.path().join("x.ann"), "").unwrap();
        fs::write(dir.path().join("y.ann"), "").unwrap();
        fs::write(dir.path().join("notes.md"), "").unwrap();
        let raw = load_corpus_dir(dir.path()).unwrap();
        assert_eq!(raw, vec![entry("x", Some("hello"), Some("")), entry("y", None, Some(""))]);
    }
}
