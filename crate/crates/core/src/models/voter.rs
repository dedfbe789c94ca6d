use serde::{Deserialize, Serialize};

use super::{ClassProbabilities, Label, ModelError};
use crate::nn::sigmoid;

const MAX_ITERATIONS: usize = 10_000;
const GRAD_TOL: f64 = 1e-6;
const STEP: f64 = 1.0;

/// Binary logistic regression over concatenated member probabilities.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LrVoter {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub trained: bool,
    pub iterations: usize,
}

impl LrVoter {
    pub fn from_weights(weights: Vec<f64>, bias: f64) -> Self {
        Self {
            weights,
            bias,
            trained: true,
            iterations: 0,
        }
    }

    pub fn score(&self, row: &[f64]) -> Result<f64, ModelError> {
        if !self.trained {
            return Err(ModelError::UntrainedVoter);
        }
        if row.len() != self.weights.len() {
            return Err(ModelError::Checkpoint(format!(
                "voter expects {} inputs, got {}",
                self.weights.len(),
                row.len()
            )));
        }
        Ok(self.bias
            + self
                .weights
                .iter()
                .zip(row)
                .map(|(w, x)| w * x)
                .sum::<f64>())
    }

    /// `sigmoid(w . row + b)` as the AD probability.
    pub fn predict(&self, row: &[f64]) -> Result<ClassProbabilities, ModelError> {
        let p = sigmoid(self.score(row)?);
        ClassProbabilities::new([1.0 - p, p])
    }
}

/// Full-batch gradient descent on mean log-loss until the gradient norm drops
/// below 1e-6 or 10 000 iterations pass.
pub fn train_lr_voter<R: AsRef<[f64]>>(
    rows: &[R],
    labels: &[Label],
) -> Result<LrVoter, ModelError> {
    assert_eq!(rows.len(), labels.len(), "one label per row");
    let Some(first) = labels.first() else {
        return Err(ModelError::EmptySplit("voter training"));
    };
    if labels.iter().all(|l| l == first) {
        return Err(ModelError::DegenerateLabels(*first));
    }
    let dim = rows[0].as_ref().len();
    let n = rows.len() as f64;
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut iterations = 0;

    for it in 1..=MAX_ITERATIONS {
        iterations = it;
        let mut gw = vec![0.0; dim];
        let mut gb = 0.0;
        for (row, label) in rows.iter().zip(labels) {
            let x = row.as_ref();
            let z = b + w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>();
            let err = sigmoid(z) - if label.is_ad() { 1.0 } else { 0.0 };
            for (g, xi) in gw.iter_mut().zip(x) {
                *g += err * xi;
            }
            gb += err;
        }
        gw.iter_mut().for_each(|g| *g /= n);
        gb /= n;
        let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        if norm < GRAD_TOL {
            break;
        }
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= STEP * g;
        }
        b -= STEP * gb;
    }

    Ok(LrVoter {
        weights: w,
        bias: b,
        trained: true,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_class_is_rejected() {
        let rows = vec![vec![0.5; 6]; 4];
        assert!(matches!(
            train_lr_voter(&rows, &[Label::Ad; 4]),
            Err(ModelError::DegenerateLabels(Label::Ad))
        ));
    }

    #[test]
    fn identical_rows_predict_the_prior() {
        let rows = vec![vec![0.6, 0.4, 0.3, 0.7, 0.5, 0.5]; 10];
        let labels: Vec<Label> = (0..10)
            .map(|i| if i < 3 { Label::Ad } else { Label::Cn })
            .collect();
        let voter = train_lr_voter(&rows, &labels).unwrap();
        assert!((voter.predict(&rows[0]).unwrap().ad() - 0.3).abs() < 1e-4);
    }

    #[test]
    fn untrained_voter_errors() {
        assert!(matches!(
            LrVoter::default().predict(&[]),
            Err(ModelError::UntrainedVoter)
        ));
    }
}
