use serde::{Deserialize, Serialize};

use super::{check_rows, FeatureError};
use crate::linalg::{dot, symmetric_eigen};

/// Principal axes fitted on training rows.
///
/// Components are unit vectors sorted by explained variance (sample
/// covariance, `n - 1` denominator). Each component is signed so that its
/// largest-magnitude coordinate is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    /// Trace of the sample covariance.
    pub total_variance: f64,
}

/// Relative eigenvalue floor below which a direction counts as absent.
const RANK_TOL: f64 = 1e-10;

pub fn fit_pca<R: AsRef<[f64]>>(rows: &[R], k: usize) -> Result<PcaModel, FeatureError> {
    let dim = check_rows(rows)?;
    let n = rows.len();
    let max_k = (n - 1).min(dim);
    if k == 0 || k > max_k {
        return Err(FeatureError::RankDeficient { k, rank: max_k });
    }

    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, &x) in mean.iter_mut().zip(r.as_ref()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.as_ref().iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    let denom = (n - 1) as f64;
    let total_variance = centered
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        / denom;

    let (mut components, explained_variance) = if n > dim {
        covariance_route(&centered, dim, k, denom)
    } else {
        gram_route(&centered, dim, k, denom)?
    };

    for c in &mut components {
        let pivot = c
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, v)| {
                if v.abs() > best.1.abs() {
                    (i, v)
                } else {
                    best
                }
            });
        if pivot.1 < 0.0 {
            c.iter_mut().for_each(|v| *v = -*v);
        }
    }

    Ok(PcaModel {
        mean,
        components,
        explained_variance,
        total_variance,
    })
}

/// Eigen-decomposition of the `d x d` covariance.
fn covariance_route(
    centered: &[Vec<f64>],
    dim: usize,
    k: usize,
    denom: f64,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut cov = vec![0.0; dim * dim];
    for r in centered {
        for i in 0..dim {
            if r[i] == 0.0 {
                continue;
            }
            for j in i..dim {
                cov[i * dim + j] += r[i] * r[j];
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            let v = cov[i * dim + j] / denom;
            cov[i * dim + j] = v;
            cov[j * dim + i] = v;
        }
    }
    let eig = symmetric_eigen(&cov, dim);
    let components = (0..k).map(|i| eig.vector(i)).collect();
    let variances = eig.values[..k].iter().map(|&v| v.max(0.0)).collect();
    (components, variances)
}

/// Eigen-decomposition of the `n x n` Gram matrix, mapped back to feature
/// space via `v = X^T u / sqrt((n - 1) lambda)`.
fn gram_route(
    centered: &[Vec<f64>],
    dim: usize,
    k: usize,
    denom: f64,
) -> Result<(Vec<Vec<f64>>, Vec<f64>), FeatureError> {
    let n = centered.len();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = dot(&centered[i], &centered[j]) / denom;
            gram[i * n + j] = v;
            gram[j * n + i] = v;
        }
    }
    let eig = symmetric_eigen(&gram, n);
    let top = eig.values[0].max(0.0);
    let rank = eig
        .values
        .iter()
        .filter(|&&v| v > RANK_TOL * top && v > 0.0)
        .count();
    if k > rank {
        return Err(FeatureError::RankDeficient { k, rank });
    }

    let mut components = Vec::with_capacity(k);
    for i in 0..k {
        let u = eig.vector(i);
        let mut v = vec![0.0; dim];
        for (r, &ui) in centered.iter().zip(&u) {
            for (vj, &x) in v.iter_mut().zip(r) {
                *vj += ui * x;
            }
        }
        let norm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        components.push(v);
    }
    Ok((components, eig.values[..k].to_vec()))
}

impl PcaModel {
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Scores `components . (x - mean)`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, FeatureError> {
        if x.len() != self.dim() {
            return Err(FeatureError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        Ok(self.components.iter().map(|c| dot(c, &centered)).collect())
    }
}
