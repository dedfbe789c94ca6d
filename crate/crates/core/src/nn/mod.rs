//! Dense and recurrent kernels with analytic gradients, losses and Adam.

mod adam;
mod dense;
mod loss;
mod lstm;
mod tensor;

pub use adam::AdamState;
pub use dense::{activate, sigmoid, softmax_rows, Activation, DenseCache, DenseGrads, DenseLayer};
pub use loss::{mse_loss, softmax_xent};
pub use lstm::{LstmCache, LstmCell, LstmGrads};
pub use tensor::{ensure_finite, Tensor2};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("{op}: shape mismatch, expected {expected}, got {got}")]
    ShapeMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },
    #[error("{op}: non-finite value encountered")]
    NonFiniteValue { op: &'static str },
}
