//! Stratified train/test split and stratified k-fold cross-validation.
//!
//! Within each label class, samples are ordered by a rank drawn from a PCG
//! stream keyed on `(seed, sample_id)`. The test set takes the head of each
//! class; the remaining training samples are dealt round-robin into folds.
//! Which partition a sample lands in therefore depends only on the seed and
//! the set of sample ids, not on their order in the input.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Dataset, Sample};
use crate::label::RelationLabel;
use crate::rate::Rate;
use crate::rng::keyed_rank;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub seed: u64,
    pub test_fraction: Rate,
    pub k_folds: usize,
}

impl SplitSpec {
    /// 25% test, 5 folds.
    pub fn new(seed: u64) -> SplitSpec {
        SplitSpec { seed, test_fraction: Rate::new(1, 4), k_folds: 5 }
    }

    pub fn validate(&self) -> Result<(), SplitError> {
        self.test_fraction.check_open_unit().map_err(|e| SplitError::InvalidSpec(e.to_string()))?;
        if self.k_folds < 2 {
            return Err(SplitError::InvalidSpec(format!("k_folds must be at least 2, got {}", self.k_folds)));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SplitError {
    #[error("invalid split spec: {0}")]
    InvalidSpec(String),
    #[error("class {label} has {train_count} training samples, fewer than {k_folds} folds")]
    ClassTooSmall { label: RelationLabel, train_count: usize, k_folds: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    pub train: Dataset,
    pub validation: Dataset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub train: Dataset,
    pub test: Dataset,
    pub folds: Vec<Fold>,
}

/// Per-partition label counts, written alongside split outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub spec: SplitSpec,
    pub partitions: Vec<PartitionCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionCounts {
    pub name: String,
    pub total: usize,
    pub per_label: Vec<(RelationLabel, usize)>,
}

impl PartitionCounts {
    fn of(d: &Dataset) -> PartitionCounts {
        let stats = d.stats();
        PartitionCounts {
            name: d.name.clone(),
            total: stats.total,
            per_label: stats.labels.iter().map(|l| (l.label, l.count)).collect(),
        }
    }
}

impl SplitResult {
    pub fn manifest(&self, spec: &SplitSpec) -> SplitManifest {
        let mut partitions = vec![PartitionCounts::of(&self.train), PartitionCounts::of(&self.test)];
        for f in &self.folds {
            partitions.push(PartitionCounts::of(&f.train));
            partitions.push(PartitionCounts::of(&f.validation));
        }
        SplitManifest { spec: *spec, partitions }
    }
}

/// Test-set size per class: floor shares plus largest-remainder top-up so
/// the total is exactly `round_half_up(fraction * n)`.
fn test_quotas(class_sizes: &[usize; RelationLabel::COUNT], fraction: Rate) -> [usize; RelationLabel::COUNT] {
    let total: usize = class_sizes.iter().sum();
    let target = fraction.round_half_up_of(total);
    let mut quotas = [0usize; RelationLabel::COUNT];
    let mut remainders = Vec::new();
    for (c, &n) in class_sizes.iter().enumerate() {
        let (floor, rem) = fraction.floor_of(n);
        quotas[c] = floor;
        remainders.push((rem, c));
    }
    let mut missing = target - quotas.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for (rem, c) in remainders {
        if missing == 0 || rem == 0 {
            break;
        }
        quotas[c] += 1;
        missing -= 1;
    }
    debug_assert_eq!(missing, 0);
    quotas
}

fn ranked(members: &mut [&Sample], seed: u64, purpose: &str) {
    members.sort_by_cached_key(|s| (keyed_rank(seed, purpose, &s.sample_id), s.sample_id.clone()));
}

pub fn stratified_split(d: &Dataset, spec: &SplitSpec) -> Result<SplitResult, SplitError> {
    spec.validate()?;

    let mut classes: [Vec<&Sample>; RelationLabel::COUNT] = Default::default();
    for s in &d.samples {
        classes[s.label.index()].push(s);
    }
    let sizes = classes.each_ref().map(Vec::len);
    let quotas = test_quotas(&sizes, spec.test_fraction);

    // sample_id -> None for test, Some(fold) for training samples.
    let mut assignment: HashMap<&str, Option<usize>> = HashMap::with_capacity(d.len());
    let mut next_fold = 0;
    for (c, members) in classes.iter_mut().enumerate() {
        ranked(members, spec.seed, "split-test");
        let (test, train) = members.split_at(quotas[c]);
        if !train.is_empty() && train.len() < spec.k_folds {
            return Err(SplitError::ClassTooSmall {
                label: RelationLabel::ALL[c],
                train_count: train.len(),
                k_folds: spec.k_folds,
            });
        }
        for s in test {
            assignment.insert(&s.sample_id, None);
        }
        let mut train = train.to_vec();
        ranked(&mut train, spec.seed, "split-fold");
        for s in train {
            assignment.insert(&s.sample_id, Some(next_fold));
            next_fold = (next_fold + 1) % spec.k_folds;
        }
    }

    let pick = |name: &str, keep: &dyn Fn(Option<usize>) -> bool| {
        let samples = d.samples.iter().filter(|s| keep(assignment[s.sample_id.as_str()])).cloned().collect();
        Dataset::new(name, &d.provenance, Some(spec.seed), samples)
    };

    let train = pick("train", &|a| a.is_some());
    let test = pick("test", &|a| a.is_none());
    let folds = (0..spec.k_folds)
        .map(|f| Fold {
            train: pick(&format!("fold{}.train", f + 1), &|a| matches!(a, Some(x) if x != f)),
            validation: pick(&format!("fold{}.val", f + 1), &|a| a == Some(f)),
        })
        .collect();
    Ok(SplitResult { train, test, folds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::sample;
    use std::collections::HashSet;

    fn synthetic(counts: [usize; 5]) -> Dataset {
        let mut samples = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            for i in 0..n {
                samples.push(sample(&format!("d{c}:R{i}"), "ab cd", (0, 2), (3, 5), RelationLabel::ALL[c]));
            }
        }
        Dataset::new("clean", "clean", None, samples)
    }

    fn ids(d: &Dataset) -> HashSet<String> {
        d.samples.iter().map(|s| s.sample_id.clone()).collect()
    }

    #[test]
    fn single_class_exact_quarter() {
        let d = synthetic([100, 0, 0, 0, 0]);
        let r = stratified_split(&d, &SplitSpec::new(1)).unwrap();
        assert_eq!((r.train.len(), r.test.len()), (75, 25));
        for f in &r.folds {
            assert_eq!(f.validation.len(), 15);
            assert_eq!(f.train.len(), 60);
        }
    }

    #[test]
    fn largest_remainder_keeps_total_exact() {
        // Every class has remainder 0.5 -> naive per-class rounding gives 10.
        let q = test_quotas(&[2, 2, 2, 2, 2], Rate::new(1, 4));
        assert_eq!(q.iter().sum::<usize>(), 3);
        assert!(q.iter().all(|&x| x <= 1));
    }

    #[test]
    fn stratification_oracle_on_imbalanced_data() {
        let counts = [403, 97, 251, 38, 1211];
        let d = synthetic(counts);
        let spec = SplitSpec::new(42);
        let r = stratified_split(&d, &spec).unwrap();

        // Independent count-by-class oracle.
        let count = |ds: &Dataset, l: RelationLabel| ds.samples.iter().filter(|s| s.label == l).count();
        for (c, &n) in counts.iter().enumerate() {
            let l = RelationLabel::ALL[c];
            let expected_test = n as f64 * 0.25;
            assert!((count(&r.test, l) as f64 - expected_test).abs() <= 1.0);
            let train_c = count(&r.train, l) as f64;
            for f in &r.folds {
                assert!((count(&f.validation, l) as f64 - train_c / 5.0).abs() <= 1.0);
            }
        }
        let total_test: usize = r.test.len();
        assert_eq!(total_test, Rate::new(1, 4).round_half_up_of(d.len()));

        // Disjointness and fold partition.
        assert!(ids(&r.train).is_disjoint(&ids(&r.test)));
        assert_eq!(ids(&r.train).len() + ids(&r.test).len(), d.len());
        let mut seen = HashSet::new();
        for f in &r.folds {
            for id in ids(&f.validation) {
                assert!(seen.insert(id));
            }
            assert!(ids(&f.train).is_disjoint(&ids(&f.validation)));
            assert_eq!(f.train.len() + f.validation.len(), r.train.len());
        }
        assert_eq!(seen, ids(&r.train));
        let sizes: Vec<usize> = r.folds.iter().map(|f| f.validation.len()).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn insertion_order_is_irrelevant() {
        let d = synthetic([40, 30, 20, 10, 25]);
        let mut shuffled = d.clone();
        shuffled.samples.reverse();
        let spec = SplitSpec::new(9);
        let a = stratified_split(&d, &spec).unwrap();
        let b = stratified_split(&shuffled, &spec).unwrap();
        assert_eq!(ids(&a.test), ids(&b.test));
        for (fa, fb) in a.folds.iter().zip(&b.folds) {
            assert_eq!(ids(&fa.validation), ids(&fb.validation));
        }
        assert_eq!(a, stratified_split(&d, &spec).unwrap());
    }

    #[test]
    fn seed_changes_assignment() {
        let d = synthetic([40, 30, 20, 10, 25]);
        let a = stratified_split(&d, &SplitSpec::new(1)).unwrap();
        let b = stratified_split(&d, &SplitSpec::new(2)).unwrap();
        assert_ne!(ids(&a.test), ids(&b.test));
    }

    #[test]
    fn tiny_class_is_rejected() {
        let d = synthetic([40, 5, 20, 10, 25]);
        let err = stratified_split(&d, &SplitSpec::new(1)).unwrap_err();
        assert_eq!(err, SplitError::ClassTooSmall { label: RelationLabel::Coreference, train_count: 4, k_folds: 5 });
    }

    #[test]
    fn bad_specs() {
        let d = synthetic([40, 0, 0, 0, 0]);
        let mut spec = SplitSpec::new(1);
        spec.k_folds = 1;
        assert!(matches!(stratified_split(&d, &spec), Err(SplitError::InvalidSpec(_))));
        spec.k_folds = 5;
        spec.test_fraction = Rate::new(1, 1);
        assert!(matches!(stratified_split(&d, &spec), Err(SplitError::InvalidSpec(_))));
    }
}
