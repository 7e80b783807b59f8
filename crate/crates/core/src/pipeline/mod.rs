//! End-to-end driver: clean, extract, split, and write every noisy variant
//! from one [`ExperimentConfig`].

mod config;
mod run;
mod validate;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{default_ner_fractions, default_ocr_wers, ExperimentConfig};
pub use run::{extract_corpus, run_pipeline, Extracted, FileEntry, RunManifest, RunSummary};
pub use validate::{validate, Severity, ValidationEntry, ValidationReport};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} holds no .txt/.ann pair")]
    EmptyCorpus(PathBuf),
    #[error("{0} exists and is not a previous pipeline output; refusing to replace it")]
    OutputOccupied(PathBuf),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> PipelineError {
        PipelineError::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn stage<E: std::error::Error + Send + Sync + 'static>(
        stage: &'static str,
    ) -> impl FnOnce(E) -> PipelineError {
        move |e| PipelineError::Stage { stage, source: Box::new(e) }
    }
}
