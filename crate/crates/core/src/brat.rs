//! Brat standoff parsing and serialization.
//!
//! A snippet is stored as `<stem>.txt` plus `<stem>.ann`. The annotation file
//! holds one annotation per line:
//!
//! ```text
//! T1<TAB>ENTITY 342 355<TAB>a beige solid
//! R1<TAB>REACTION_ASSOCIATED Arg1:T6 Arg2:T5
//! ```
//!
//! Text-bound (`T`) lines may carry any type label. Relation (`R`) lines must
//! use one of the five [`RelationLabel`]s. Other annotation kinds (events,
//! attributes, normalizations, comments) are skipped with a warning.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::RelationLabel;
use crate::text::{normalize_newlines, CharText, Span};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub id: String,
    pub type_label: String,
    /// Covering span. For discontinuous mentions this runs from the first
    /// fragment's start to the last fragment's end.
    pub span: Span,
    /// The individual fragments; a single element for contiguous mentions.
    pub fragments: Vec<Span>,
    pub surface: String,
}

impl EntityMention {
    pub fn contiguous(id: &str, type_label: &str, span: Span, surface: &str) -> Self {
        EntityMention {
            id: id.to_string(),
            type_label: type_label.to_string(),
            span,
            fragments: vec![span],
            surface: surface.to_string(),
        }
    }

    pub fn is_discontinuous(&self) -> bool {
        self.fragments.len() > 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationInstance {
    pub id: String,
    pub label: RelationLabel,
    /// `Arg1` in the annotation file.
    pub anaphor_id: String,
    /// `Arg2` in the annotation file.
    pub antecedent_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    pub entities: Vec<EntityMention>,
    pub relations: Vec<RelationInstance>,
}

impl Document {
    pub fn entity(&self, id: &str) -> Option<&EntityMention> {
        self.entities.iter().find(|e| e.id == id)
    }

    /// Copy with entities and relations sorted by id, for order-insensitive
    /// comparison.
    pub fn canonicalized(&self) -> Document {
        let mut d = self.clone();
        d.entities.sort_by_key(|e| id_order(&e.id));
        d.relations.sort_by_key(|r| id_order(&r.id));
        d
    }
}

/// Natural ordering key for annotation ids: `R2` sorts before `R10`.
pub fn id_order(id: &str) -> (String, u64, String) {
    let split = id.find(|c: char| c.is_ascii_digit()).unwrap_or(id.len());
    let (prefix, rest) = id.split_at(split);
    let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
    let n = digits.parse().unwrap_or(u64::MAX);
    (prefix.to_string(), n, id.to_string())
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum BratError {
    #[error("line {line}: {id} quotes {quoted:?} but text{span} is {actual:?}")]
    OffsetMismatch { line: usize, id: String, span: Span, quoted: String, actual: String },
    #[error("line {line}: span {span} of {id} is empty or exceeds text length {text_len}")]
    InvalidSpan { line: usize, id: String, span: Span, text_len: usize },
    #[error("line {line}: relation {relation} references unknown entity {entity}")]
    DanglingReference { line: usize, relation: String, entity: String },
    #[error("line {line}: malformed annotation: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: unknown relation label {label:?}")]
    UnknownRelationLabel { line: usize, label: String },
    #[error("line {line}: duplicate annotation id {id}")]
    DuplicateId { line: usize, id: String },
}

impl BratError {
    pub fn kind(&self) -> &'static str {
        match self {
            BratError::OffsetMismatch { .. } => "OffsetMismatch",
            BratError::InvalidSpan { .. } => "InvalidSpan",
            BratError::DanglingReference { .. } => "DanglingReference",
            BratError::MalformedLine { .. } => "MalformedLine",
            BratError::UnknownRelationLabel { .. } => "UnknownRelationLabel",
            BratError::DuplicateId { .. } => "DuplicateId",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum WarningKind {
    /// An annotation kind this toolkit does not model (E, A, N, #, ...).
    SkippedLine,
    /// A text-bound annotation with more than one fragment.
    DiscontinuousSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarning {
    pub line: usize,
    pub kind: WarningKind,
    pub message: String,
}

/// A successfully parsed document and the warnings raised on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub document: Document,
    pub warnings: Vec<ParseWarning>,
}

/// Every diagnostic for one annotation file. Lines that failed to parse are
/// left out of `document`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub document: Document,
    pub warnings: Vec<ParseWarning>,
    pub errors: Vec<BratError>,
}

/// Parse a text/annotation pair, failing on the first error.
pub fn parse_document(text_content: &str, ann_content: &str, doc_id: &str) -> Result<Parsed, BratError> {
    let mut diag = parse_with_diagnostics(text_content, ann_content, doc_id);
    if !diag.errors.is_empty() {
        return Err(diag.errors.swap_remove(0));
    }
    Ok(Parsed { document: diag.document, warnings: diag.warnings })
}

/// Parse a text/annotation pair, collecting every error instead of stopping.
/// Errors are ordered by line number.
pub fn parse_with_diagnostics(text_content: &str, ann_content: &str, doc_id: &str) -> Diagnostics {
    let text = normalize_newlines(text_content);
    let ann = normalize_newlines(ann_content);
    let chars = CharText::new(&text);

    let mut warnings = Vec::new();
    let mut errors = Vec::new();
    let mut entities = Vec::new();
    let mut pending_relations: Vec<(usize, RelationInstance)> = Vec::new();
    let mut seen_ids = HashSet::new();

    for (idx, raw_line) in ann.split('\n').enumerate() {
        let line = idx + 1;
        if raw_line.trim().is_empty() {
            continue;
        }
        let id = raw_line.split(char::is_whitespace).next().unwrap_or_default();
        let kind = annotation_kind(id);
        match kind {
            Some('T') | Some('R') => {}
            _ => {
                warnings.push(ParseWarning {
                    line,
                    kind: WarningKind::SkippedLine,
                    message: format!("skipped unsupported annotation {:?}", truncate(raw_line, 40)),
                });
                continue;
            }
        }
        if !raw_line[id.len()..].starts_with('\t') {
            errors.push(BratError::MalformedLine { line, reason: "expected a tab after the id".into() });
            continue;
        }
        if !seen_ids.insert(id.to_string()) {
            errors.push(BratError::DuplicateId { line, id: id.to_string() });
            continue;
        }
        let result = if kind == Some('T') {
            parse_text_bound(line, raw_line, &chars).map(|(mention, warn)| {
                warnings.extend(warn);
                entities.push(mention);
            })
        } else {
            parse_relation(line, raw_line).map(|rel| pending_relations.push((line, rel)))
        };
        if let Err(e) = result {
            errors.push(e);
        }
    }

    let known: HashMap<&str, ()> = entities.iter().map(|e| (e.id.as_str(), ())).collect();
    let mut relations = Vec::new();
    for (line, rel) in pending_relations {
        let missing = [&rel.anaphor_id, &rel.antecedent_id].into_iter().find(|id| !known.contains_key(id.as_str()));
        match missing {
            Some(entity) => {
                errors.push(BratError::DanglingReference { line, relation: rel.id.clone(), entity: entity.clone() })
            }
            None => relations.push(rel),
        }
    }
    errors.sort_by_key(error_line);

    Diagnostics { document: Document { doc_id: doc_id.to_string(), text, entities, relations }, warnings, errors }
}

fn error_line(e: &BratError) -> usize {
    match e {
        BratError::OffsetMismatch { line, .. }
        | BratError::InvalidSpan { line, .. }
        | BratError::DanglingReference { line, .. }
        | BratError::MalformedLine { line, .. }
        | BratError::UnknownRelationLabel { line, .. }
        | BratError::DuplicateId { line, .. } => *line,
    }
}

/// `Some('T')` for `T<digits>`, `Some('R')` for `R<digits>`, else the first
/// char when it names another annotation kind.
fn annotation_kind(id: &str) -> Option<char> {
    let mut chars = id.chars();
    let first = chars.next()?;
    let rest = chars.as_str();
    let numbered = !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit());
    match first {
        'T' | 'R' if numbered => Some(first),
        'T' | 'R' => None,
        other => Some(other),
    }
}

fn truncate(s: &str, n: usize) -> String {
    s.chars().take(n).collect()
}

fn parse_text_bound(
    line: usize,
    raw: &str,
    text: &CharText<'_>,
) -> Result<(EntityMention, Option<ParseWarning>), BratError> {
    let malformed = |reason: &str| BratError::MalformedLine { line, reason: reason.to_string() };
    let mut parts = raw.splitn(3, '\t');
    let id = parts.next().unwrap_or_default();
    let body = parts.next().ok_or_else(|| malformed("text-bound annotation lacks a body"))?;
    let surface = parts.next().ok_or_else(|| malformed("text-bound annotation lacks surface text"))?;

    let (type_label, offsets) = body.split_once(' ').ok_or_else(|| malformed("expected '<label> <start> <end>'"))?;
    if type_label.is_empty() {
        return Err(malformed("empty type label"));
    }

    let mut fragments = Vec::new();
    for frag in offsets.split(';') {
        let nums: Vec<&str> = frag.split_whitespace().collect();
        let [s, e] = nums.as_slice() else {
            return Err(malformed("offset fragment must be '<start> <end>'"));
        };
        let start: usize = s.parse().map_err(|_| malformed("non-integer start offset"))?;
        let end: usize = e.parse().map_err(|_| malformed("non-integer end offset"))?;
        fragments.push(Span::new(start, end));
    }

    let mut pieces = Vec::with_capacity(fragments.len());
    for span in &fragments {
        match text.slice(*span) {
            Some(piece) if !span.is_empty() => pieces.push(piece),
            _ => return Err(BratError::InvalidSpan { line, id: id.to_string(), span: *span, text_len: text.len() }),
        }
    }
    // Brat joins discontinuous fragments with a single space in the quoted text.
    let actual = pieces.join(" ");
    let covering = Span::new(fragments[0].start, fragments[fragments.len() - 1].end);
    if actual != surface {
        return Err(BratError::OffsetMismatch {
            line,
            id: id.to_string(),
            span: covering,
            quoted: surface.to_string(),
            actual,
        });
    }

    let warning = (fragments.len() > 1).then(|| ParseWarning {
        line,
        kind: WarningKind::DiscontinuousSpan,
        message: format!("{id} has {} fragments; relations over it are not extracted", fragments.len()),
    });
    Ok((
        EntityMention {
            id: id.to_string(),
            type_label: type_label.to_string(),
            span: covering,
            fragments,
            surface: surface.to_string(),
        },
        warning,
    ))
}

fn parse_relation(line: usize, raw: &str) -> Result<RelationInstance, BratError> {
    let malformed = |reason: &str| BratError::MalformedLine { line, reason: reason.to_string() };
    let mut parts = raw.split('\t');
    let id = parts.next().unwrap_or_default();
    let body = parts.next().ok_or_else(|| malformed("relation lacks a body"))?;
    // Brat itself writes a trailing empty column after relations.
    if parts.any(|rest| !rest.trim().is_empty()) {
        return Err(malformed("unexpected text after relation arguments"));
    }

    let mut tokens = body.split_whitespace();
    let label_str = tokens.next().ok_or_else(|| malformed("relation lacks a label"))?;
    let mut arg1 = None;
    let mut arg2 = None;
    for tok in tokens {
        let (name, target) = tok.split_once(':').ok_or_else(|| malformed("argument must be 'ArgN:T<id>'"))?;
        if annotation_kind(target) != Some('T') {
            return Err(malformed("relation arguments must reference T annotations"));
        }
        let slot = match name {
            "Arg1" => &mut arg1,
            "Arg2" => &mut arg2,
            _ => return Err(malformed("relation arguments must be Arg1 and Arg2")),
        };
        if slot.replace(target.to_string()).is_some() {
            return Err(malformed("repeated relation argument"));
        }
    }
    let (Some(anaphor_id), Some(antecedent_id)) = (arg1, arg2) else {
        return Err(malformed("relation needs both Arg1 and Arg2"));
    };
    let label: RelationLabel =
        label_str.parse().map_err(|_| BratError::UnknownRelationLabel { line, label: label_str.to_string() })?;
    if anaphor_id == antecedent_id {
        return Err(malformed("relation links an entity to itself"));
    }
    Ok(RelationInstance { id: id.to_string(), label, anaphor_id, antecedent_id })
}

/// Render a document back to `(txt, ann)` contents. Text-bound lines come
/// first, then relations, each in stored order.
pub fn serialize_document(doc: &Document) -> (String, String) {
    let mut ann = String::new();
    for e in &doc.entities {
        let offsets: Vec<String> = e.fragments.iter().map(|f| format!("{} {}", f.start, f.end)).collect();
        let _ = writeln!(ann, "{}\t{} {}\t{}", e.id, e.type_label, offsets.join(";"), e.surface);
    }
    for r in &doc.relations {
        let _ = writeln!(ann, "{}\t{} Arg1:{} Arg2:{}", r.id, r.label, r.anaphor_id, r.antecedent_id);
    }
    (doc.text.clone(), ann)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "The reaction mixture was concentrated.\nThen the residue was purified.\n";

    #[test]
    fn parses_entities_and_relations() {
        let ann = "T1\tENTITY 0 20\tThe reaction mixture\nT2\tENTITY 44 55\tthe residue\n\
                   R1\tTRANSFORMED Arg1:T2 Arg2:T1\t\n";
        let parsed = parse_document(TEXT, ann, "d").unwrap();
        let doc = parsed.document;
        assert_eq!(doc.entities.len(), 2);
        assert_eq!(doc.entities[1].span, Span::new(44, 55));
        assert_eq!(doc.relations[0].label, RelationLabel::Transformed);
        assert_eq!(doc.relations[0].anaphor_id, "T2");
        assert_eq!(doc.relations[0].antecedent_id, "T1");
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn empty_annotations_yield_empty_document() {
        let doc = parse_document(TEXT, "", "d").unwrap().document;
        assert!(doc.entities.is_empty() && doc.relations.is_empty());
        assert_eq!(serialize_document(&doc).1, "");
    }

    #[test]
    fn offsets_count_unicode_scalars() {
        let text = "ratio 0:100→1:80 used";
        let ann = "T1\tENTITY 6 16\t0:100→1:80\nT2\tENTITY 17 21\tused\n";
        let doc = parse_document(text, ann, "u").unwrap().document;
        assert_eq!(doc.entities[1].span, Span::new(17, 21));
    }

    #[test]
    fn surface_mismatch_is_an_error() {
        let err = parse_document(TEXT, "T1\tENTITY 0 3\tthe\n", "d").unwrap_err();
        assert!(matches!(err, BratError::OffsetMismatch { line: 1, .. }), "{err:?}");
    }

    #[test]
    fn out_of_range_span_is_an_error() {
        let err = parse_document("abc", "T1\tENTITY 1 9\tbc\n", "d").unwrap_err();
        assert!(matches!(err, BratError::InvalidSpan { .. }));
        let err = parse_document("abc", "T1\tENTITY 2 2\t\n", "d").unwrap_err();
        assert!(matches!(err, BratError::InvalidSpan { .. }));
    }

    #[test]
    fn dangling_reference_is_an_error() {
        let ann = "T1\tENTITY 0 3\tThe\nR1\tCOREFERENCE Arg1:T1 Arg2:T9\n";
        let err = parse_document(TEXT, ann, "d").unwrap_err();
        assert_eq!(err, BratError::DanglingReference { line: 2, relation: "R1".into(), entity: "T9".into() });
    }

    #[test]
    fn relations_may_precede_their_entities() {
        let ann = "R1\tCOREFERENCE Arg1:T2 Arg2:T1\nT1\tENTITY 0 3\tThe\nT2\tENTITY 44 47\tthe\n";
        assert!(parse_document(TEXT, ann, "d").is_ok());
    }

    #[test]
    fn unknown_relation_label_is_an_error() {
        let ann = "T1\tENTITY 0 3\tThe\nT2\tENTITY 44 47\tthe\nR1\tBRIDGING Arg1:T2 Arg2:T1\n";
        let err = parse_document(TEXT, ann, "d").unwrap_err();
        assert!(matches!(err, BratError::UnknownRelationLabel { ref label, .. } if label == "BRIDGING"));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let ann = "T1\tENTITY 0 3\tThe\nT1\tENTITY 44 47\tthe\n";
        let err = parse_document(TEXT, ann, "d").unwrap_err();
        assert_eq!(err, BratError::DuplicateId { line: 2, id: "T1".into() });
    }

    #[test]
    fn malformed_lines() {
        for ann in [
            "T1\tENTITY 0\tThe\n",
            "T1\tENTITY zero 3\tThe\n",
            "T1 ENTITY 0 3 The\n",
            "T1\tENTITY 0 3\tThe\nR1\tCOREFERENCE Arg1:T1\n",
            "T1\tENTITY 0 3\tThe\nR1\tCOREFERENCE Arg1:T1 Arg2:T1\n",
            "T1\tENTITY 0 3\tThe\nR1\tCOREFERENCE Arg1:T1 Arg3:T1\n",
        ] {
            let err = parse_document(TEXT, ann, "d").unwrap_err();
            assert!(matches!(err, BratError::MalformedLine { .. }), "{ann:?} -> {err:?}");
        }
    }

    #[test]
    fn other_annotation_kinds_are_skipped_with_warning() {
        let ann = "#1\tAnnotatorNotes T1\tnote\nT1\tENTITY 0 3\tThe\nA1\tNegated T1\n";
        let parsed = parse_document(TEXT, ann, "d").unwrap();
        assert_eq!(parsed.document.entities.len(), 1);
        let lines: Vec<usize> = parsed.warnings.iter().map(|w| w.line).collect();
        assert_eq!(lines, vec![1, 3]);
    }

    #[test]
    fn discontinuous_spans_are_flagged() {
        let ann = "T1\tENTITY 0 3;13 20\tThe mixture\n";
        let parsed = parse_document(TEXT, ann, "d").unwrap();
        let e = &parsed.document.entities[0];
        assert!(e.is_discontinuous());
        assert_eq!(e.span, Span::new(0, 20));
        assert_eq!(parsed.warnings[0].kind, WarningKind::DiscontinuousSpan);
        let (_, ann_out) = serialize_document(&parsed.document);
        assert_eq!(ann_out, ann);
    }

    #[test]
    fn crlf_input_is_normalized_before_offsets() {
        let text = "ab\r\ncd";
        let doc = parse_document(text, "T1\tENTITY 3 5\tcd\r\n", "d").unwrap().document;
        assert_eq!(doc.text, "ab\ncd");
    }

    #[test]
    fn diagnostics_collect_every_error() {
        let ann = "T1\tENTITY 0 3\tthe\nT2\tENTITY 0\tx\nR1\tCOREFERENCE Arg1:T1 Arg2:T7\n";
        let diag = parse_with_diagnostics(TEXT, ann, "d");
        let kinds: Vec<&str> = diag.errors.iter().map(BratError::kind).collect();
        assert_eq!(kinds, vec!["OffsetMismatch", "MalformedLine", "DanglingReference"]);
    }

    #[test]
    fn natural_id_order() {
        let mut ids = vec!["R10", "R2", "R1"];
        ids.sort_by_key(|s| id_order(s));
        assert_eq!(ids, vec!["R1", "R2", "R10"]);
    }
}
