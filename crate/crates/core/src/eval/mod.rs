//! Fold construction, metrics, ROC analysis and fold aggregation.
//!
//! AD is the positive class throughout.

mod folds;
mod metrics;
mod roc;

pub use folds::{
    holdout_split, make_grouped_folds, make_loso_folds, make_stratified_folds, Fold, FoldPlan,
};
pub use metrics::{
    aggregate_report, classification_metrics, mean_std, regression_metrics, ClassificationMetrics,
    ConfusionMatrix, FoldMetrics, MetricSummary, MetricsReport, RegressionMetrics,
};
pub use roc::{roc_curve, RocCurve, RocPoint};

use thiserror::Error;

use crate::models::Label;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("class {class} has {have} members, fewer than k = {k}")]
    TooFewPerClass { class: Label, have: usize, k: usize },
    #[error("leave-one-subject-out needs at least 2 subjects, got {0}")]
    TooFewSubjects(usize),
    #[error("{groups} distinct groups cannot fill {k} folds")]
    TooFewGroups { groups: usize, k: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("{preds} predictions for {targets} targets")]
    LengthMismatch { preds: usize, targets: usize },
    #[error("no samples to evaluate")]
    EmptyInput,
    #[error("ROC analysis needs both classes present")]
    SingleClass,
}
