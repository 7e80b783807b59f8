//! Noisy dataset variants.

pub mod keyboard;
pub mod ner;
pub mod ocr;

pub use ner::{perturb_ner, NerNoiseConfig, NerReport, SpanMutation};
pub use ocr::{perturb_ocr, OcrNoiseConfig, SampleEdits, WordEdit};
