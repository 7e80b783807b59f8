//! Scoring prediction files against gold labels.

mod matrix;
mod metrics;

pub use matrix::{score_matrix, ExperimentMatrix, MatrixCell};
pub use metrics::{
    aggregate, aggregate_values, confusion_render, normalized_confusion, report_from_confusion, score, score_labels,
    Aggregate, ClassMetrics, EvalError, MetricsReport, PredictionSet,
};
