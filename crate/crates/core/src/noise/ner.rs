//! NER span-boundary noise.
//!
//! A fixed share of samples gets exactly one boundary mistake on one of its
//! two entities: the start or end moves one word left or right, or the
//! entity is cut at a word gap and one side kept. Every mutated span still
//! overlaps the original, which is the "right label, overlapping span" class
//! of NER error.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{precedes, Dataset, Sample};
use crate::rate::Rate;
use crate::rng::{keyed_rank, keyed_rng};
use crate::text::{whitespace_tokens, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NerNoiseConfig {
    pub fraction: Rate,
    pub seed: u64,
}

impl NerNoiseConfig {
    pub fn validate(&self) -> Result<(), NerError> {
        self.fraction.check_half_open_unit().map(|_| ()).map_err(|e| NerError::InvalidFraction(e.to_string()))
    }

    pub fn tag(&self) -> String {
        format!("ner@{}", self.fraction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    E1,
    E2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    StartLeft,
    StartRight,
    EndLeft,
    EndRight,
    Split,
}

impl MutationKind {
    pub const ALL: [MutationKind; 5] = [
        MutationKind::StartLeft,
        MutationKind::StartRight,
        MutationKind::EndLeft,
        MutationKind::EndRight,
        MutationKind::Split,
    ];
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NerError {
    #[error("invalid sample fraction: {0}")]
    InvalidFraction(String),
    #[error("{kind:?} is infeasible for span {span}: {reason}")]
    InfeasibleMutation { kind: MutationKind, span: Span, reason: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanMutation {
    pub sample_id: String,
    pub target: Target,
    pub kind: MutationKind,
    pub old_span: Span,
    pub new_span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NerReport {
    pub requested: usize,
    pub mutated: usize,
    /// Samples drawn for mutation that admitted no feasible mutation.
    pub infeasible: Vec<String>,
    /// `requested - mutated`; non-zero only when the dataset ran out of
    /// feasible samples.
    pub shortfall: usize,
}

/// Every span `kind` can turn `span` into. Moves have one outcome; a split
/// has two per inter-word gap (keep left, keep right).
pub fn mutation_candidates(text: &str, span: Span, kind: MutationKind) -> Result<Vec<Span>, NerError> {
    let infeasible = |reason| NerError::InfeasibleMutation { kind, span, reason };
    let words = whitespace_tokens(text);
    let inside: Vec<Span> = words.iter().copied().filter(|w| w.overlaps(&span)).collect();
    match kind {
        MutationKind::StartLeft => {
            let prev =
                words.iter().rev().find(|w| w.end <= span.start).ok_or_else(|| infeasible("no word before span"))?;
            Ok(vec![Span::new(prev.start, span.end)])
        }
        MutationKind::EndRight => {
            let next = words.iter().find(|w| w.start >= span.end).ok_or_else(|| infeasible("no word after span"))?;
            Ok(vec![Span::new(span.start, next.end)])
        }
        MutationKind::StartRight if inside.len() >= 2 => Ok(vec![Span::new(inside[1].start, span.end)]),
        MutationKind::EndLeft if inside.len() >= 2 => Ok(vec![Span::new(span.start, inside[inside.len() - 2].end)]),
        MutationKind::Split if inside.len() >= 2 => Ok(inside
            .windows(2)
            .flat_map(|pair| [Span::new(span.start, pair[0].end), Span::new(pair[1].start, span.end)])
            .collect()),
        MutationKind::StartRight | MutationKind::EndLeft | MutationKind::Split => {
            Err(infeasible("span holds fewer than two words"))
        }
    }
}

/// Move one boundary of `span` by one word, or split it and keep a side.
pub fn mutate_span<R: Rng + ?Sized>(text: &str, span: Span, kind: MutationKind, rng: &mut R) -> Result<Span, NerError> {
    let candidates = mutation_candidates(text, span, kind)?;
    Ok(candidates[rng.gen_range(0..candidates.len())])
}

fn span_of(sample: &Sample, target: Target) -> Span {
    match target {
        Target::E1 => sample.e1,
        Target::E2 => sample.e2,
    }
}

/// Draw one feasible `(target, kind)` for `sample` and apply it. Infeasible
/// draws are removed and the draw repeated over what remains. A mutation is
/// also infeasible when it would swap which entity comes first.
pub fn mutate_sample(sample: &Sample, seed: u64) -> Option<(Sample, SpanMutation)> {
    let mut rng = keyed_rng(seed, "ner", &sample.sample_id);
    let mut remaining: Vec<(Target, MutationKind)> =
        [Target::E1, Target::E2].into_iter().flat_map(|t| MutationKind::ALL.into_iter().map(move |k| (t, k))).collect();

    while !remaining.is_empty() {
        let (target, kind) = remaining.remove(rng.gen_range(0..remaining.len()));
        let old = span_of(sample, target);
        let Ok(candidates) = mutation_candidates(&sample.text, old, kind) else {
            continue;
        };
        let valid: Vec<Span> = candidates
            .into_iter()
            .filter(|&new| match target {
                Target::E1 => precedes(new, sample.e2),
                Target::E2 => precedes(sample.e1, new),
            })
            .collect();
        if valid.is_empty() {
            continue;
        }
        let new = valid[rng.gen_range(0..valid.len())];
        let mut out = sample.clone();
        match target {
            Target::E1 => out.e1 = new,
            Target::E2 => out.e2 = new,
        }
        let mutation = SpanMutation { sample_id: sample.sample_id.clone(), target, kind, old_span: old, new_span: new };
        return Some((out, mutation));
    }
    None
}

/// Mutate `round_half_up(fraction * |d|)` samples, chosen by a seeded ranking
/// over sample ids. Untouched samples pass through unchanged.
pub fn perturb_ner(d: &Dataset, cfg: &NerNoiseConfig) -> Result<(Dataset, Vec<SpanMutation>, NerReport), NerError> {
    cfg.validate()?;
    let requested = cfg.fraction.round_half_up_of(d.len());

    let mut order: Vec<(u64, &str, usize)> = d
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| (keyed_rank(cfg.seed, "ner-select", &s.sample_id), s.sample_id.as_str(), i))
        .collect();
    order.sort_unstable();

    let mut report = NerReport { requested, ..Default::default() };
    let mut chosen: Vec<(usize, Sample, SpanMutation)> = Vec::with_capacity(requested);
    // Work through the ranking in batches so a shortfall is made up from the
    // next-ranked samples.
    let mut next = 0;
    while chosen.len() < requested && next < order.len() {
        let take = (requested - chosen.len()).min(order.len() - next);
        let batch = &order[next..next + take];
        next += take;
        let results: Vec<_> = batch.par_iter().map(|&(_, _, i)| (i, mutate_sample(&d.samples[i], cfg.seed))).collect();
        for (i, r) in results {
            match r {
                Some((s, m)) => chosen.push((i, s, m)),
                None => report.infeasible.push(d.samples[i].sample_id.clone()),
            }
        }
    }
    report.mutated = chosen.len();
    report.shortfall = requested - chosen.len();

    chosen.sort_by_key(|c| c.0);
    let mut samples = d.samples.clone();
    let tag = cfg.tag();
    let mut log = Vec::with_capacity(chosen.len());
    for (i, mut s, m) in chosen {
        s.noise_tag = tag.clone();
        samples[i] = s;
        log.push(m);
    }
    Ok((Dataset::new(&d.name, &tag, Some(cfg.seed), samples), log, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::sample;
    use crate::label::RelationLabel;
    use crate::text::char_slice;

    const TOY: &str = "xx aa bb cc dd yy";
    const ENTITY: Span = Span::new(3, 14); // "aa bb cc dd"

    fn spans_of(kind: MutationKind) -> Vec<&'static str> {
        mutation_candidates(TOY, ENTITY, kind).unwrap().into_iter().map(|s| char_slice(TOY, s)).collect()
    }

    #[test]
    fn hand_enumerated_toy_outcomes() {
        assert_eq!(spans_of(MutationKind::StartLeft), vec!["xx aa bb cc dd"]);
        assert_eq!(spans_of(MutationKind::StartRight), vec!["bb cc dd"]);
        assert_eq!(spans_of(MutationKind::EndLeft), vec!["aa bb cc"]);
        assert_eq!(spans_of(MutationKind::EndRight), vec!["aa bb cc dd yy"]);
        assert_eq!(spans_of(MutationKind::Split), vec!["aa", "bb cc dd", "aa bb", "cc dd", "aa bb cc", "dd"]);
    }

    #[test]
    fn infeasible_moves() {
        let single = Span::new(0, 2);
        for kind in [MutationKind::StartLeft, MutationKind::StartRight, MutationKind::EndLeft, MutationKind::Split] {
            assert!(matches!(mutation_candidates(TOY, single, kind), Err(NerError::InfeasibleMutation { .. })));
        }
        assert!(mutation_candidates(TOY, Span::new(15, 17), MutationKind::EndRight).is_err());
    }

    #[test]
    fn mid_word_boundaries_snap_to_words() {
        // Entity "4" inside "(4)".
        let text = "Compound (4) was";
        let got = mutation_candidates(text, Span::new(10, 11), MutationKind::StartLeft).unwrap();
        assert_eq!(char_slice(text, got[0]), "Compound (4");
        let got = mutation_candidates(text, Span::new(10, 11), MutationKind::EndRight).unwrap();
        assert_eq!(char_slice(text, got[0]), "4) was");
    }

    #[test]
    fn candidates_overlap_and_differ() {
        for kind in MutationKind::ALL {
            for new in mutation_candidates(TOY, ENTITY, kind).unwrap() {
                assert!(!new.is_empty() && new != ENTITY && new.overlaps(&ENTITY));
            }
        }
    }

    fn dataset(n: usize) -> Dataset {
        let samples = (0..n)
            .map(|i| {
                sample(
                    &format!("d:R{i}"),
                    "the hot salt and the cold water here",
                    (0, 12),
                    (17, 31),
                    RelationLabel::Contained,
                )
            })
            .collect();
        Dataset::new("train", "clean", None, samples)
    }

    #[test]
    fn mutates_exact_share() {
        let d = dataset(10);
        for (f, expected) in [("0.25", 3), ("0.5", 5), ("0.75", 8), ("1", 10), ("0.04", 0)] {
            let cfg = NerNoiseConfig { fraction: f.parse().unwrap(), seed: 3 };
            let (out, log, report) = perturb_ner(&d, &cfg).unwrap();
            assert_eq!(log.len(), expected, "fraction {f}");
            assert_eq!(report.shortfall, 0);
            let changed = out.samples.iter().zip(&d.samples).filter(|(a, b)| a != b).count();
            assert_eq!(changed, expected);
            for (a, b) in out.samples.iter().zip(&d.samples) {
                assert_eq!(a.label, b.label);
                assert_eq!(a.sample_id, b.sample_id);
                a.check().unwrap();
                if a == b {
                    assert_eq!(a.noise_tag, "");
                } else {
                    assert_eq!(a.noise_tag, cfg.tag());
                    // Exactly one entity moved.
                    assert!((a.e1 != b.e1) ^ (a.e2 != b.e2));
                }
            }
        }
    }

    #[test]
    fn infeasible_samples_are_replaced_by_the_next_ranked() {
        let mut d = dataset(6);
        // Single-word entities with nothing around them: no feasible mutation.
        for s in d.samples.iter_mut().take(3) {
            s.text = "ab".into();
            s.e1 = Span::new(0, 1);
            s.e2 = Span::new(1, 2);
        }
        let cfg = NerNoiseConfig { fraction: "0.5".parse().unwrap(), seed: 8 };
        let (_, log, report) = perturb_ner(&d, &cfg).unwrap();
        assert_eq!(log.len(), 3);
        assert_eq!(report.shortfall, 0);

        let cfg = NerNoiseConfig { fraction: Rate::new(1, 1), seed: 8 };
        let (_, log, report) = perturb_ner(&d, &cfg).unwrap();
        assert_eq!(log.len(), 3);
        assert_eq!(report.shortfall, 3);
        assert_eq!(report.infeasible.len(), 3);
    }

    #[test]
    fn order_changes_do_not_change_output() {
        let d = dataset(12);
        let cfg = NerNoiseConfig { fraction: "0.5".parse().unwrap(), seed: 1 };
        let (a, la, _) = perturb_ner(&d, &cfg).unwrap();
        let mut rev = d.clone();
        rev.samples.reverse();
        let (mut b, mut lb, _) = perturb_ner(&rev, &cfg).unwrap();
        b.samples.reverse();
        lb.sort_by(|x, y| crate::brat::id_order(&x.sample_id[2..]).cmp(&crate::brat::id_order(&y.sample_id[2..])));
        assert_eq!(a, b);
        assert_eq!(la, lb);
    }
}
