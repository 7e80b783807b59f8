//! OCR-failure noise: keyboard typos and adjacent swaps at a word error rate.
//!
//! A "word" is a whitespace-delimited token of the marked text with the four
//! entity markers split off and excluded. A word is eligible when at least
//! one operator can change it (it contains a letter, or two adjacent
//! distinct characters). For a sample with `W` eligible words, exactly
//! `n = round_half_up(wer * W)` words are corrupted, with `n` clamped to
//! `[1, W]`.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::keyboard::{can_swap, can_typo, keyboard_typo, swap_noise};
use crate::corpus::{Dataset, Sample};
use crate::rate::Rate;
use crate::rng::keyed_rng;
use crate::text::{char_slice, whitespace_tokens, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OcrNoiseConfig {
    pub wer: Rate,
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OcrError {
    #[error("invalid word error rate: {0}")]
    InvalidRate(String),
}

impl OcrNoiseConfig {
    pub fn validate(&self) -> Result<(), OcrError> {
        self.wer.check_half_open_unit().map(|_| ()).map_err(|e| OcrError::InvalidRate(e.to_string()))
    }

    pub fn tag(&self) -> String {
        format!("ocr@{}", self.wer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    KeyboardTypo,
    Swap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordEdit {
    /// Index among the sample's words (markers excluded).
    pub word_index: usize,
    pub kind: EditKind,
    /// Character position within the word; for swaps, the first of the pair.
    pub char_position: usize,
    pub original: String,
    pub replaced: String,
}

/// Edit-log record for one sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleEdits {
    pub sample_id: String,
    pub eligible_words: usize,
    pub edits: Vec<WordEdit>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
}

/// Character spans (in `sample.text`) of the words of the marked text.
/// Raw whitespace tokens are cut at entity boundaries, which is exactly where
/// markers sit in the marked text.
pub fn word_spans(sample: &Sample) -> Vec<Span> {
    let mut cuts = [sample.e1.start, sample.e1.end, sample.e2.start, sample.e2.end];
    cuts.sort_unstable();
    let mut out = Vec::new();
    for tok in whitespace_tokens(&sample.text) {
        let mut start = tok.start;
        for &c in cuts.iter().filter(|&&c| c > tok.start && c < tok.end) {
            if c > start {
                out.push(Span::new(start, c));
                start = c;
            }
        }
        out.push(Span::new(start, tok.end));
    }
    out
}

pub fn is_eligible(word: &str) -> bool {
    can_typo(word) || can_swap(word)
}

/// `round_half_up(wer * eligible)` clamped to `[1, eligible]`.
pub fn edit_budget(wer: Rate, eligible: usize) -> usize {
    if eligible == 0 || wer.is_zero() {
        return 0;
    }
    wer.round_half_up_of(eligible).clamp(1, eligible)
}

/// Apply one edit, preferring `kind` and falling back to the other operator.
fn corrupt<R: Rng>(word: &str, kind: EditKind, rng: &mut R) -> Option<(EditKind, String, usize)> {
    let order = match kind {
        EditKind::KeyboardTypo => [EditKind::KeyboardTypo, EditKind::Swap],
        EditKind::Swap => [EditKind::Swap, EditKind::KeyboardTypo],
    };
    order.into_iter().find_map(|k| {
        let r = match k {
            EditKind::KeyboardTypo => keyboard_typo(word, rng),
            EditKind::Swap => swap_noise(word, rng),
        };
        r.ok().map(|(w, pos)| (k, w, pos))
    })
}

/// Perturb one sample. Spans are remapped through the edits so they keep
/// delimiting the (possibly corrupted) entity surfaces.
pub fn perturb_sample(sample: &Sample, cfg: &OcrNoiseConfig) -> (Sample, SampleEdits) {
    let words = word_spans(sample);
    let eligible: Vec<usize> = (0..words.len()).filter(|&i| is_eligible(char_slice(&sample.text, words[i]))).collect();
    let n = edit_budget(cfg.wer, eligible.len());
    let mut log = SampleEdits {
        sample_id: sample.sample_id.clone(),
        eligible_words: eligible.len(),
        edits: Vec::new(),
        warning: None,
    };
    if n == 0 {
        log.warning = Some("NoEligibleWord: sample left unmodified".into());
        return (sample.clone(), log);
    }

    let mut rng = keyed_rng(cfg.seed, "ocr", &sample.sample_id);
    let mut chosen: Vec<usize> = sample_indices(&mut rng, eligible.len(), n).into_iter().map(|i| eligible[i]).collect();
    chosen.sort_unstable();

    let mut replacements: Vec<(Span, String)> = Vec::with_capacity(n);
    for word_index in chosen {
        let span = words[word_index];
        let original = char_slice(&sample.text, span);
        let drawn = if rng.gen_bool(0.5) { EditKind::KeyboardTypo } else { EditKind::Swap };
        let (kind, replaced, char_position) =
            corrupt(original, drawn, &mut rng).expect("eligible words admit at least one operator");
        log.edits.push(WordEdit {
            word_index,
            kind,
            char_position,
            original: original.to_string(),
            replaced: replaced.clone(),
        });
        replacements.push((span, replaced));
    }

    let remap = OffsetRemap::new(&replacements);
    let mut noisy = sample.clone();
    noisy.text = remap.apply(&sample.text);
    noisy.e1 = Span::new(remap.map(sample.e1.start), remap.map(sample.e1.end));
    noisy.e2 = Span::new(remap.map(sample.e2.start), remap.map(sample.e2.end));
    noisy.noise_tag = cfg.tag();
    (noisy, log)
}

/// Clean-to-noisy offset mapping for a set of non-overlapping replacements.
struct OffsetRemap<'a> {
    // Sorted by span start.
    edits: &'a [(Span, String)],
}

impl<'a> OffsetRemap<'a> {
    fn new(edits: &'a [(Span, String)]) -> Self {
        debug_assert!(edits.windows(2).all(|w| w[0].0.end <= w[1].0.start));
        OffsetRemap { edits }
    }

    /// Map a clean offset that does not fall strictly inside an edited span.
    fn map(&self, pos: usize) -> usize {
        let mut shift: isize = 0;
        for (span, rep) in self.edits {
            if span.end <= pos {
                shift += rep.chars().count() as isize - span.len() as isize;
            } else {
                debug_assert!(pos <= span.start, "offset {pos} inside edited span {span}");
                break;
            }
        }
        (pos as isize + shift) as usize
    }

    fn apply(&self, text: &str) -> String {
        let chars: Vec<char> = text.chars().collect();
        let mut out = String::with_capacity(text.len());
        let mut cursor = 0;
        for (span, rep) in self.edits {
            out.extend(&chars[cursor..span.start]);
            out.push_str(rep);
            cursor = span.end;
        }
        out.extend(&chars[cursor..]);
        out
    }
}

/// Corrupt every sample in `d`. Labels, ids and sample order are preserved.
pub fn perturb_ocr(d: &Dataset, cfg: &OcrNoiseConfig) -> Result<(Dataset, Vec<SampleEdits>), OcrError> {
    cfg.validate()?;
    let (samples, logs): (Vec<Sample>, Vec<SampleEdits>) = d.samples.par_iter().map(|s| perturb_sample(s, cfg)).unzip();
    let out = Dataset::new(&d.name, &cfg.tag(), Some(cfg.seed), samples);
    Ok((out, logs))
}
