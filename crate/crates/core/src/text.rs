//! Character-offset arithmetic.
//!
//! All offsets in this crate count Unicode scalar values, never bytes. Brat
//! offsets are defined that way and the corpus contains non-ASCII symbols
//! (arrows, degree signs, Greek letters) that would otherwise shift every
//! later annotation.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Half-open character range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Shift both endpoints left by `offset`.
    pub fn rebase(&self, offset: usize) -> Span {
        Span::new(self.start - offset, self.end - offset)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// A string paired with its char-to-byte boundary table.
#[derive(Debug, Clone)]
pub struct CharText<'a> {
    text: &'a str,
    // bounds[i] is the byte offset of char i; the final entry is text.len().
    bounds: Vec<usize>,
}

impl<'a> CharText<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut bounds: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bounds.push(text.len());
        CharText { text, bounds }
    }

    pub fn as_str(&self) -> &'a str {
        self.text
    }

    /// Length in characters.
    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn byte_offset(&self, char_offset: usize) -> Option<usize> {
        self.bounds.get(char_offset).copied()
    }

    /// Slice by character offsets; `None` when out of range or reversed.
    pub fn slice(&self, span: Span) -> Option<&'a str> {
        if span.start > span.end {
            return None;
        }
        let a = self.byte_offset(span.start)?;
        let b = self.byte_offset(span.end)?;
        Some(&self.text[a..b])
    }
}

/// Number of characters in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Slice `s` by character offsets, panicking when out of range.
pub fn char_slice(s: &str, span: Span) -> &str {
    CharText::new(s).slice(span).unwrap_or_else(|| panic!("span {span} out of range for text of {} chars", char_len(s)))
}

/// Character spans of the maximal runs of non-whitespace in `s`.
pub fn whitespace_tokens(s: &str) -> Vec<Span> {
    let mut out = Vec::new();
    let mut start = None;
    let mut i = 0;
    for ch in s.chars() {
        match (ch.is_whitespace(), start) {
            (true, Some(st)) => {
                out.push(Span::new(st, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
        i += 1;
    }
    if let Some(st) = start {
        out.push(Span::new(st, i));
    }
    out
}

/// Normalize CRLF (and lone CR) line endings to LF.
pub fn normalize_newlines(s: &str) -> String {
    if !s.contains('\r') {
        return s.to_string();
    }
    s.replace("\r\n", "\n").replace('\r', "\n")
}
