use serde::{Deserialize, Serialize};

use super::NnError;

/// Adam with bias correction. Moment buffers are allocated lazily on the first
/// update and must mirror the parameter groups thereafter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn update(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<(), NnError> {
        let mismatch = |expected: String, got: String| NnError::ShapeMismatch {
            op: "adam_update",
            expected,
            got,
        };
        if params.len() != grads.len() {
            return Err(mismatch(
                format!("{} gradient groups", params.len()),
                grads.len().to_string(),
            ));
        }
        for (p, g) in params.iter().zip(grads) {
            if p.len() != g.len() {
                return Err(mismatch(
                    format!("{} gradients", p.len()),
                    g.len().to_string(),
                ));
            }
        }
        if self.m.is_empty() {
            self.m = params.iter().map(|p| vec![0.0; p.len()]).collect();
            self.v = self.m.clone();
        } else if self.m.len() != params.len()
            || self
                .m
                .iter()
                .zip(params.iter())
                .any(|(m, p)| m.len() != p.len())
        {
            return Err(mismatch(
                "parameter groups matching optimizer state".into(),
                "different layout".into(),
            ));
        }

        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut state = AdamState::new(0.01);
        let mut p = vec![1.5, -2.0];
        state.update(&mut [&mut p], &[&[0.0, 0.0]]).unwrap();
        assert_eq!(p, vec![1.5, -2.0]);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // m_hat = v_hat = 1 at t = 1, so the step is lr / (1 + eps).
        let mut state = AdamState::new(0.01);
        let mut p = vec![0.0];
        state.update(&mut [&mut p], &[&[1.0]]).unwrap();
        assert!((p[0] + 0.01 / (1.0 + 1e-8)).abs() < 1e-15);
    }

    #[test]
    fn layout_mismatch() {
        let mut state = AdamState::new(0.01);
        let mut p = vec![0.0; 2];
        assert!(state.update(&mut [&mut p], &[&[1.0]]).is_err());
        state.update(&mut [&mut p], &[&[1.0, 1.0]]).unwrap();
        let mut q = vec![0.0; 3];
        assert!(state.update(&mut [&mut q], &[&[1.0, 1.0, 1.0]]).is_err());
    }
}
