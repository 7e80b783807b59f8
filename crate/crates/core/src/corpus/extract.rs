//! Sentence windows and relation-sample extraction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{precedes, Dataset, Role, Sample};
use super::markers::contains_marker;
use crate::brat::{id_order, Document, EntityMention, RelationInstance};
use crate::text::{char_slice, Span};

/// Sentence spans of `text`, trimmed of surrounding whitespace.
///
/// A sentence ends at a newline, or after `.`, `?` or `!` when followed by
/// whitespace and then an uppercase letter or a digit. Terminators inside
/// parentheses never end a sentence; parenthesis depth resets at newlines.
pub fn sentence_spans(text: &str) -> Vec<Span> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut last_non_ws = 0;
    let mut depth: usize = 0;

    let close = |start: &mut Option<usize>, end: usize, out: &mut Vec<Span>| {
        if let Some(s) = start.take() {
            out.push(Span::new(s, end));
        }
    };

    for (i, &ch) in chars.iter().enumerate() {
        if ch == '\n' {
            close(&mut start, last_non_ws + 1, &mut out);
            depth = 0;
            continue;
        }
        if ch.is_whitespace() {
            continue;
        }
        if start.is_none() {
            start = Some(i);
        }
        last_non_ws = i;
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            '.' | '?' | '!' if depth == 0 && ends_sentence(&chars, i) => {
                close(&mut start, i + 1, &mut out);
            }
            _ => {}
        }
    }
    close(&mut start, last_non_ws + 1, &mut out);
    out
}

fn ends_sentence(chars: &[char], i: usize) -> bool {
    let mut j = i + 1;
    if j >= chars.len() || !chars[j].is_whitespace() {
        return false;
    }
    while j < chars.len() && chars[j].is_whitespace() {
        j += 1;
    }
    j < chars.len() && (chars[j].is_uppercase() || chars[j].is_ascii_digit())
}

/// Smallest run of consecutive sentences covering `cover`, or `None` when
/// the sentences do not reach it.
pub fn sentence_window(sentences: &[Span], cover: Span) -> Option<Span> {
    let start = sentences.iter().rev().find(|s| s.start <= cover.start)?.start;
    let end = sentences.iter().find(|s| s.end >= cover.end)?.end;
    Some(Span::new(start, end))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowLog {
    pub sample_id: String,
    /// Window in document offsets.
    pub window: Span,
    /// True when segmentation failed and the whole document was used.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedRelation {
    pub doc_id: String,
    pub relation_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub windows: Vec<WindowLog>,
    pub skipped: Vec<SkippedRelation>,
}

impl ExtractionReport {
    pub fn fallbacks(&self) -> usize {
        self.windows.iter().filter(|w| w.fallback).count()
    }
}

pub fn sample_id(doc_id: &str, relation_id: &str) -> String {
    format!("{doc_id}:{relation_id}")
}

/// One sample per relation, ordered by `(doc_id, relation id)`.
pub fn extract_samples(documents: &[Document]) -> (Dataset, ExtractionReport) {
    let per_doc: Vec<_> = documents.par_iter().map(extract_document).collect();

    let mut rows: Vec<(Sample, WindowLog)> = Vec::new();
    let mut report = ExtractionReport::default();
    for (rows_doc, skipped) in per_doc {
        rows.extend(rows_doc);
        report.skipped.extend(skipped);
    }
    rows.sort_by(|(a, _), (b, _)| {
        a.doc_id.cmp(&b.doc_id).then_with(|| {
            let ra = &a.sample_id[a.doc_id.len() + 1..];
            let rb = &b.sample_id[b.doc_id.len() + 1..];
            id_order(ra).cmp(&id_order(rb))
        })
    });
    report
        .skipped
        .sort_by(|a, b| a.doc_id.cmp(&b.doc_id).then_with(|| id_order(&a.relation_id).cmp(&id_order(&b.relation_id))));

    let (samples, windows) = rows.into_iter().unzip();
    report.windows = windows;
    (Dataset::new("clean", "clean", None, samples), report)
}

type DocRows = (Vec<(Sample, WindowLog)>, Vec<SkippedRelation>);

fn extract_document(doc: &Document) -> DocRows {
    let sentences = sentence_spans(&doc.text);
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for rel in &doc.relations {
        match extract_relation(doc, rel, &sentences) {
            Ok(row) => rows.push(row),
            Err(reason) => {
                skipped.push(SkippedRelation { doc_id: doc.doc_id.clone(), relation_id: rel.id.clone(), reason })
            }
        }
    }
    (rows, skipped)
}

fn extract_relation(doc: &Document, rel: &RelationInstance, sentences: &[Span]) -> Result<(Sample, WindowLog), String> {
    let lookup =
        |id: &str| -> Result<&EntityMention, String> { doc.entity(id).ok_or_else(|| format!("unknown entity {id}")) };
    let anaphor = lookup(&rel.anaphor_id)?;
    let antecedent = lookup(&rel.antecedent_id)?;
    for e in [anaphor, antecedent] {
        if e.is_discontinuous() {
            return Err(format!("entity {} is discontinuous", e.id));
        }
    }
    if anaphor.span == antecedent.span {
        return Err(format!("entities {} and {} have identical spans", anaphor.id, antecedent.id));
    }

    let (first, second, first_role) = if precedes(anaphor.span, antecedent.span) {
        (anaphor, antecedent, Role::Anaphor)
    } else {
        (antecedent, anaphor, Role::Antecedent)
    };

    let cover = Span::new(first.span.start, first.span.end.max(second.span.end));
    let id = sample_id(&doc.doc_id, &rel.id);
    let (window, fallback) = match sentence_window(sentences, cover) {
        Some(w) if w.contains(&cover) => (w, false),
        _ => (Span::new(0, doc.text.chars().count()), true),
    };
    let text = char_slice(&doc.text, window).to_string();
    if contains_marker(&text) {
        return Err("context window contains an entity-marker literal".into());
    }

    let sample = Sample {
        sample_id: id.clone(),
        doc_id: doc.doc_id.clone(),
        text,
        e1: first.span.rebase(window.start),
        e2: second.span.rebase(window.start),
        label: rel.label,
        e1_role: first_role,
        e2_role: first_role.other(),
        noise_tag: String::new(),
    };
    debug_assert!(sample.check().is_ok());
    Ok((sample, WindowLog { sample_id: id, window, fallback }))
}
