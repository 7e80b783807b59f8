//! Stress-testing toolkit for anaphoric relation classification in chemical
//! patents.
//!
//! The pipeline reads Brat standoff annotations ([`brat`]), turns every
//! annotated relation into an entity-marked sample ([`corpus`]), splits the
//! samples into stratified train/test sets and cross-validation folds
//! ([`split`]), derives noisy copies that simulate OCR failures
//! ([`noise::ocr`]) and NER span-boundary mistakes ([`noise::ner`]), and
//! scores prediction files ([`eval`]). [`pipeline`] runs all of it from one
//! experiment config.
//!
//! Every random choice is drawn from a stream keyed by the user's seed and
//! the id of the item being processed, so outputs are byte-for-byte
//! reproducible regardless of input order or thread count.

pub mod brat;
pub mod corpus;
pub mod eval;
pub mod label;
pub mod noise;
pub mod pipeline;
pub mod rate;
pub mod rng;
pub mod split;
pub mod text;

pub use label::RelationLabel;
pub use rate::Rate;
pub use text::Span;
