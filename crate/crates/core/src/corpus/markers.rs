//! Entity-marker syntax. This is the only place that knows what the markers
//! look like.

use thiserror::Error;

use crate::text::{CharText, Span};

pub const E1_OPEN: &str = "<e1>";
pub const E1_CLOSE: &str = "</e1>";
pub const E2_OPEN: &str = "<e2>";
pub const E2_CLOSE: &str = "</e2>";

/// The four marker tokens in the order they appear for disjoint spans.
pub const MARKERS: [&str; 4] = [E1_OPEN, E1_CLOSE, E2_OPEN, E2_CLOSE];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Marker {
    Open(u8),
    Close(u8),
}

impl Marker {
    fn inserted(self) -> &'static str {
        match self {
            Marker::Open(1) => "<e1> ",
            Marker::Open(_) => "<e2> ",
            Marker::Close(1) => " </e1>",
            Marker::Close(_) => " </e2>",
        }
    }
}

/// True when `text` already contains something that looks like a marker.
pub fn contains_marker(text: &str) -> bool {
    MARKERS.iter().any(|m| text.contains(m))
}

/// Insert `"<e1> "`/`" </e1>"` around `e1` and `"<e2> "`/`" </e2>"` around
/// `e2`.
///
/// At a shared position closing markers precede opening ones. Among closers
/// the inner span (later start) closes first; among openers the longer span
/// opens first, so nested spans always render well nested.
pub fn render_marked_text(text: &str, e1: Span, e2: Span) -> String {
    let chars = CharText::new(text);
    let mut events = vec![
        (e1.start, Marker::Open(1), e1),
        (e1.end, Marker::Close(1), e1),
        (e2.start, Marker::Open(2), e2),
        (e2.end, Marker::Close(2), e2),
    ];
    events.sort_by(|a, b| {
        a.0.cmp(&b.0).then_with(|| match (a.1, b.1) {
            (Marker::Close(_), Marker::Open(_)) => std::cmp::Ordering::Less,
            (Marker::Open(_), Marker::Close(_)) => std::cmp::Ordering::Greater,
            (Marker::Close(_), Marker::Close(_)) => b.2.start.cmp(&a.2.start),
            (Marker::Open(_), Marker::Open(_)) => b.2.end.cmp(&a.2.end),
        })
    });

    let mut out = String::with_capacity(text.len() + 24);
    let mut cursor = 0;
    for (pos, marker, _) in events {
        out.push_str(chars.slice(Span::new(cursor, pos)).expect("span within text"));
        out.push_str(marker.inserted());
        cursor = pos;
    }
    out.push_str(chars.slice(Span::new(cursor, chars.len())).expect("cursor within text"));
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MarkerError {
    #[error("marker {0} appears {1} times")]
    Count(&'static str, usize),
    #[error("closing marker for e{0} precedes its opening marker")]
    Order(u8),
}

/// Inverse of [`render_marked_text`]: recover the raw text and both spans.
pub fn strip_markers(marked: &str) -> Result<(String, Span, Span), MarkerError> {
    let table = [Marker::Open(1), Marker::Close(1), Marker::Open(2), Marker::Close(2)];
    let mut found: [Vec<usize>; 4] = Default::default();
    let mut raw = String::with_capacity(marked.len());
    let mut raw_len = 0;
    let mut rest = marked;
    'scan: while !rest.is_empty() {
        for (slot, m) in table.iter().enumerate() {
            if let Some(after) = rest.strip_prefix(m.inserted()) {
                found[slot].push(raw_len);
                rest = after;
                continue 'scan;
            }
        }
        let ch = rest.chars().next().expect("non-empty");
        raw.push(ch);
        raw_len += 1;
        rest = &rest[ch.len_utf8()..];
    }
    for (slot, name) in MARKERS.iter().enumerate() {
        if found[slot].len() != 1 {
            return Err(MarkerError::Count(name, found[slot].len()));
        }
    }
    let e1 = Span::new(found[0][0], found[1][0]);
    let e2 = Span::new(found[2][0], found[3][0]);
    if e1.start > e1.end {
        return Err(MarkerError::Order(1));
    }
    if e2.start > e2.end {
        return Err(MarkerError::Order(2));
    }
    Ok((raw, e1, e2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::char_slice;
    use proptest::prelude::*;

    #[test]
    fn disjoint_spans() {
        let t = "A flask and a stirrer";
        let m = render_marked_text(t, Span::new(0, 7), Span::new(12, 21));
        assert_eq!(m, "<e1> A flask </e1> and <e2> a stirrer </e2>");
    }

    #[test]
    fn e1_covers_whole_text() {
        let m = render_marked_text("abc def", Span::new(0, 7), Span::new(4, 7));
        assert_eq!(m, "<e1> abc <e2> def </e2> </e1>");
        let m = render_marked_text("abc", Span::new(0, 3), Span::new(0, 1));
        assert_eq!(m, "<e1> <e2> a </e2>bc </e1>");
    }

    #[test]
    fn adjacent_spans_close_before_open() {
        let m = render_marked_text("ab", Span::new(0, 1), Span::new(1, 2));
        assert_eq!(m, "<e1> a </e1><e2> b </e2>");
        assert_eq!(strip_markers(&m).unwrap(), ("ab".into(), Span::new(0, 1), Span::new(1, 2)));
    }

    #[test]
    fn strip_rejects_missing_or_repeated_markers() {
        assert_eq!(strip_markers("<e1> a </e1>"), Err(MarkerError::Count(E2_OPEN, 0)));
        assert!(strip_markers("<e1> a </e1> <e2> b </e2> <e2> c").is_err());
    }

    fn text_and_spans() -> impl Strategy<Value = (String, Span, Span)> {
        "[a-z →().]{2,30}".prop_flat_map(|t| {
            let n = t.chars().count();
            (Just(t), 0..n, 0..n, 0..n, 0..n).prop_filter_map("non-empty distinct spans", |(t, a, b, c, d)| {
                let s1 = Span::new(a.min(b), a.max(b) + 1);
                let s2 = Span::new(c.min(d), c.max(d) + 1);
                (s1 != s2).then_some((t, s1, s2))
            })
        })
    }

    proptest! {
        #[test]
        fn strip_inverts_render((text, e1, e2) in text_and_spans()) {
            let marked = render_marked_text(&text, e1, e2);
            for m in MARKERS {
                prop_assert_eq!(marked.matches(m).count(), 1);
            }
            let (raw, s1, s2) = strip_markers(&marked).unwrap();
            prop_assert_eq!(&raw, &text);
            prop_assert_eq!(char_slice(&raw, s1), char_slice(&text, e1));
            prop_assert_eq!((s1, s2), (e1, e2));
        }
    }
}
