use serde::{Deserialize, Serialize};

use super::{check_rows, FeatureError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_minmax<R: AsRef<[f64]>>(rows: &[R]) -> Result<MinMaxStats, FeatureError> {
    let dim = check_rows(rows)?;
    let mut min = vec![f64::INFINITY; dim];
    let mut max = vec![f64::NEG_INFINITY; dim];
    for r in rows {
        for (j, &x) in r.as_ref().iter().enumerate() {
            min[j] = min[j].min(x);
            max[j] = max[j].max(x);
        }
    }
    Ok(MinMaxStats { min, max })
}

impl MinMaxStats {
    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// `(x - min) / (max - min)`; constant training columns map to 0.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, FeatureError> {
        if x.len() != self.dim() {
            return Err(FeatureError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect())
    }
}

/// Column means and population standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScoreStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn fit_zscore<R: AsRef<[f64]>>(rows: &[R]) -> Result<ZScoreStats, FeatureError> {
    let dim = check_rows(rows)?;
    let n = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, &x) in mean.iter_mut().zip(r.as_ref()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for r in rows {
        for ((v, &x), &m) in var.iter_mut().zip(r.as_ref()).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    let std = var.into_iter().map(|v| (v / n).sqrt()).collect();
    Ok(ZScoreStats { mean, std })
}

impl ZScoreStats {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `(x - mean) / std`; zero-variance columns map to 0.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, FeatureError> {
        if x.len() != self.dim() {
            return Err(FeatureError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| if s > 0.0 { (v - m) / s } else { 0.0 })
            .collect())
    }
}
