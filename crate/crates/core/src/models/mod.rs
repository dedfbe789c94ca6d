//! The three per-view classifiers, their transfer-learned MMSE regressors,
//! the logistic-regression voter and the checkpoint container.

mod checkpoint;
mod network;
mod train;
mod voter;

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Preprocess,
    CHECKPOINT_VERSION,
};
pub use network::{build_classifier, to_regressor, Body, Network};
pub use train::{
    train_classifier, train_regressor, ClassificationSet, EpochRecord, ModelCheckpoint,
    RegressionSet, TrainingHistory,
};
pub use voter::{train_lr_voter, LrVoter};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::{NnError, Tensor2};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("{0} split is empty")]
    EmptySplit(&'static str),
    #[error("expected a {expected:?} model, got {got:?}")]
    WrongTask { expected: Task, got: Task },
    #[error("{kind:?} model cannot take this input: {detail}")]
    InputMismatch { kind: ModelKind, detail: String },
    #[error("voter training needs both classes, only {0} present")]
    DegenerateLabels(Label),
    #[error("voter has not been trained")]
    UntrainedVoter,
    #[error("invalid class probabilities {0:?}")]
    InvalidProbabilities([f64; 2]),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    Disfluency,
    Acoustic,
    Interventions,
}

impl ModelKind {
    /// Ensemble member order.
    pub const ALL: [ModelKind; 3] = [
        ModelKind::Disfluency,
        ModelKind::Acoustic,
        ModelKind::Interventions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Disfluency => "disfluency",
            ModelKind::Acoustic => "acoustic",
            ModelKind::Interventions => "interventions",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    Classification,
    Regression,
}

/// Diagnosis; AD is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    /// Control, non-AD. Class index 0.
    Cn,
    /// Alzheimer's dementia. Class index 1.
    Ad,
}

impl Label {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        if i == 1 {
            Label::Ad
        } else {
            Label::Cn
        }
    }

    pub fn is_ad(self) -> bool {
        self == Label::Ad
    }

    pub fn code(self) -> &'static str {
        match self {
            Label::Cn => "CN",
            Label::Ad => "AD",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AD" | "1" | "DEMENTIA" | "PROBABLEAD" => Ok(Label::Ad),
            "CN" | "0" | "CONTROL" | "NON-AD" | "HC" => Ok(Label::Cn),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// Probabilities over `[non-AD, AD]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassProbabilities([f64; 2]);

impl ClassProbabilities {
    pub fn new(p: [f64; 2]) -> Result<Self, ModelError> {
        if p.iter().any(|&v| !(0.0..=1.0).contains(&v)) || ((p[0] + p[1]) - 1.0).abs() > 1e-9 {
            return Err(ModelError::InvalidProbabilities(p));
        }
        Ok(Self(p))
    }

    pub fn from_ad(p_ad: f64) -> Result<Self, ModelError> {
        Self::new([1.0 - p_ad, p_ad])
    }

    pub fn as_array(&self) -> [f64; 2] {
        self.0
    }

    pub fn non_ad(&self) -> f64 {
        self.0[0]
    }

    pub fn ad(&self) -> f64 {
        self.0[1]
    }

    /// Argmax; an exact tie goes to non-AD.
    pub fn label(&self) -> Label {
        if self.0[1] > self.0[0] {
            Label::Ad
        } else {
            Label::Cn
        }
    }
}

pub const MMSE_MAX: f64 = 30.0;

/// MMSE score, always within `[0, 30]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct MmseScore(f64);

impl MmseScore {
    pub fn clamped(v: f64) -> Self {
        Self(v.clamp(0.0, MMSE_MAX))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Hidden sizes and input shapes of the three classifiers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchConfig {
    pub disfluency_inputs: usize,
    pub disfluency_hidden: usize,
    pub acoustic_inputs: usize,
    pub acoustic_hidden: usize,
    pub sequence_len: usize,
    pub lstm_hidden: usize,
}

impl Default for ArchConfig {
    fn default() -> Self {
        Self {
            disfluency_inputs: crate::features::DISFLUENCY_DIM,
            disfluency_hidden: 24,
            acoustic_inputs: crate::features::PCA_COMPONENTS,
            acoustic_hidden: 16,
            sequence_len: crate::features::SEQUENCE_LEN,
            lstm_hidden: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub lr_classification: f64,
    pub lr_regression: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 8,
            lr_classification: 0.01,
            lr_regression: 0.001,
            max_epochs: 400,
            seed: 0,
        }
    }
}

/// Model input for one subject: a flat vector for the MLPs or a `T x 3`
/// one-hot turn sequence for the recurrent model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelInput {
    Vector(Vec<f64>),
    Sequence(Tensor2),
}

/// Mixes a tag into a base seed (splitmix64 finalizer).
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut z = base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
