//! Per-subject feature representations: scaled disfluency rates, PCA-reduced
//! acoustic functionals and a padded one-hot speaker-turn sequence.
//!
//! Every `fit_*` function sees training rows only and returns immutable
//! statistics; `apply` never mutates them.

mod disfluency;
mod interventions;
mod pca;
mod scaling;

pub use disfluency::{extract_disfluency_raw, DISFLUENCY_FEATURE_NAMES};
pub use interventions::{encode_interventions, TurnChannel};
pub use pca::{fit_pca, PcaModel};
pub use scaling::{fit_minmax, fit_zscore, MinMaxStats, ZScoreStats};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::Tensor2;

pub const DISFLUENCY_DIM: usize = 11;
pub const COMPARE_DIM: usize = 6373;
pub const PCA_COMPONENTS: usize = 21;
pub const SEQUENCE_LEN: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("audio duration must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("need at least {needed} training rows, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("requested {k} components but only {rank} are available")]
    RankDeficient { k: usize, rank: usize },
    #[error("expected a {expected}-dimensional vector, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub subject_id: String,
    pub disfluency: Vec<f64>,
    pub acoustic: Vec<f64>,
    pub interventions: Tensor2,
}

/// Statistics fitted on one training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessStats {
    pub disfluency: MinMaxStats,
    pub acoustic_z: ZScoreStats,
    pub pca: PcaModel,
}

pub(crate) fn check_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<usize, FeatureError> {
    if rows.len() < 2 {
        return Err(FeatureError::InsufficientData {
            needed: 2,
            got: rows.len(),
        });
    }
    let dim = rows[0].as_ref().len();
    for r in rows {
        if r.as_ref().len() != dim {
            return Err(FeatureError::DimensionMismatch {
                expected: dim,
                got: r.as_ref().len(),
            });
        }
    }
    Ok(dim)
}
