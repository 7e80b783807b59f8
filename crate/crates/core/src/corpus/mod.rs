//! Corpus cleaning, sample extraction and the dataset format.

mod clean;
mod dataset;
mod extract;
pub mod markers;

pub use clean::{clean_corpus, load_corpus_dir, CleaningEntry, CleaningReason, CleaningReport, RawEntry};
pub use dataset::{
    meta_path, precedes, read_dataset, to_jsonl, write_dataset, Dataset, DatasetError, DatasetMeta, LabelCount,
    LabelStats, Role, Sample, SampleRecord,
};
pub use extract::{
    extract_samples, sample_id, sentence_spans, sentence_window, ExtractionReport, SkippedRelation, WindowLog,
};
pub use markers::{render_marked_text, strip_markers};

/// Label counts and proportions for a dataset.
pub fn dataset_stats(d: &Dataset) -> LabelStats {
    d.stats()
}

#[cfg(test)]
pub(crate) use dataset::test_support;
