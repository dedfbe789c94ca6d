//! End-to-end orchestration: load subjects, build folds, fit preprocessing
//! and models per fold, evaluate individual models and ensembles.

mod experiment;
mod modelset;
mod subjects;

pub use experiment::{
    evaluate_model_set, run_experiment, train_final_model_set, EnsembleSelection, ExperimentConfig,
    ExperimentReport, FoldOutcome, HistoryRecord, MetricRow, Protocol, Split, SummaryRow,
    TaskSelection, AVERAGE_ENSEMBLE, HARD_ENSEMBLE, LEARNT_ENSEMBLE, SOFT_ENSEMBLE,
};
pub use modelset::{model_input, ModelSet, SubjectPrediction};
pub use subjects::{
    load_subject, load_subjects, AccessObserver, FeatureConfig, FitStage, NoopObserver,
    SubjectRecord,
};

use thiserror::Error;

use crate::data::DataError;
use crate::ensemble::EnsembleError;
use crate::eval::EvalError;
use crate::features::FeatureError;
use crate::models::ModelError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("protocol mismatch: {0}")]
    ProtocolMismatch(String),
    #[error("checkpoint carries no preprocessing statistics")]
    MissingPreprocess,
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error("could not start worker pool: {0}")]
    ThreadPool(String),
}
