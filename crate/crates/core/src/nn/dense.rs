use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{ensure_finite, Tensor2};
use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Softmax,
    Linear,
    Sigmoid,
    Tanh,
}

/// Fully connected layer `activation(W x + b)` with `W` stored `out x in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub w: Tensor2,
    pub b: Vec<f64>,
    pub activation: Activation,
}

/// Values kept from the forward pass for backprop.
#[derive(Debug, Clone)]
pub struct DenseCache {
    pub input: Tensor2,
    pub pre: Tensor2,
    pub output: Tensor2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrads {
    pub w: Tensor2,
    pub b: Vec<f64>,
}

impl DenseLayer {
    /// Glorot-uniform weights, zero biases.
    pub fn glorot<R: Rng + ?Sized>(
        inputs: usize,
        outputs: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let data = (0..inputs * outputs)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        Self {
            w: Tensor2::from_vec(outputs, inputs, data).expect("sized above"),
            b: vec![0.0; outputs],
            activation,
        }
    }

    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self {
            w: Tensor2::zeros(outputs, inputs),
            b: vec![0.0; outputs],
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.w.cols()
    }

    pub fn outputs(&self) -> usize {
        self.w.rows()
    }

    pub fn param_count(&self) -> usize {
        self.w.data().len() + self.b.len()
    }

    /// Pre-activations `x W^T + b` for a `batch x in` input.
    pub fn pre_activation(&self, x: &Tensor2) -> Result<Tensor2, NnError> {
        if x.cols() != self.inputs() {
            return Err(NnError::ShapeMismatch {
                op: "dense_forward",
                expected: format!("batch x {}", self.inputs()),
                got: format!("{}x{}", x.rows(), x.cols()),
            });
        }
        let mut pre = x.matmul_t(&self.w)?;
        for r in 0..pre.rows() {
            for (z, b) in pre.row_mut(r).iter_mut().zip(&self.b) {
                *z += b;
            }
        }
        pre.ensure_finite("dense_forward")?;
        Ok(pre)
    }

    pub fn forward(&self, x: &Tensor2) -> Result<(Tensor2, DenseCache), NnError> {
        let pre = self.pre_activation(x)?;
        let output = activate(self.activation, &pre);
        output.ensure_finite("dense_forward")?;
        let cache = DenseCache {
            input: x.clone(),
            pre,
            output: output.clone(),
        };
        Ok((output, cache))
    }

    /// Gradients of a scalar loss given `upstream = dL/d(output)`.
    pub fn backward(
        &self,
        cache: &DenseCache,
        upstream: &Tensor2,
    ) -> Result<(DenseGrads, Tensor2), NnError> {
        cache.output.same_shape(upstream, "dense_backward")?;
        let dpre = activation_backward(self.activation, cache, upstream);
        self.backward_from_pre(&cache.input, &dpre)
    }

    /// Backward pass starting from `dL/d(pre-activation)`.
    pub fn backward_from_pre(
        &self,
        input: &Tensor2,
        dpre: &Tensor2,
    ) -> Result<(DenseGrads, Tensor2), NnError> {
        if dpre.cols() != self.outputs() || dpre.rows() != input.rows() {
            return Err(NnError::ShapeMismatch {
                op: "dense_backward",
                expected: format!("{}x{}", input.rows(), self.outputs()),
                got: format!("{}x{}", dpre.rows(), dpre.cols()),
            });
        }
        let w = dpre.t_matmul(input)?;
        let mut b = vec![0.0; self.outputs()];
        for r in 0..dpre.rows() {
            for (acc, g) in b.iter_mut().zip(dpre.row(r)) {
                *acc += g;
            }
        }
        let dx = dpre.matmul(&self.w)?;
        w.ensure_finite("dense_backward")?;
        ensure_finite(&b, "dense_backward")?;
        dx.ensure_finite("dense_backward")?;
        Ok((DenseGrads { w, b }, dx))
    }
}

pub fn activate(activation: Activation, pre: &Tensor2) -> Tensor2 {
    match activation {
        Activation::Relu => pre.map(|z| z.max(0.0)),
        Activation::Linear => pre.clone(),
        Activation::Sigmoid => pre.map(sigmoid),
        Activation::Tanh => pre.map(f64::tanh),
        Activation::Softmax => softmax_rows(pre),
    }
}

fn activation_backward(activation: Activation, cache: &DenseCache, upstream: &Tensor2) -> Tensor2 {
    let (rows, cols) = upstream.shape();
    let mut d = Tensor2::zeros(rows, cols);
    for r in 0..rows {
        let g = upstream.row(r);
        let z = cache.pre.row(r);
        let y = cache.output.row(r);
        let out = d.row_mut(r);
        match activation {
            Activation::Relu => {
                for i in 0..cols {
                    out[i] = if z[i] > 0.0 { g[i] } else { 0.0 };
                }
            }
            Activation::Linear => out.copy_from_slice(g),
            Activation::Sigmoid => {
                for i in 0..cols {
                    out[i] = g[i] * y[i] * (1.0 - y[i]);
                }
            }
            Activation::Tanh => {
                for i in 0..cols {
                    out[i] = g[i] * (1.0 - y[i] * y[i]);
                }
            }
            Activation::Softmax => {
                let gy: f64 = g.iter().zip(y).map(|(a, b)| a * b).sum();
                for i in 0..cols {
                    out[i] = y[i] * (g[i] - gy);
                }
            }
        }
    }
    d
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(logits: &Tensor2) -> Tensor2 {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_linear_layer() {
        let layer = DenseLayer {
            w: Tensor2::identity(2),
            b: vec![0.0, 0.0],
            activation: Activation::Linear,
        };
        let (y, _) = layer.forward(&Tensor2::row_vector(&[3.0, -1.0])).unwrap();
        assert_eq!(y.data(), &[3.0, -1.0]);
    }

    #[test]
    fn relu_gates_gradient() {
        let layer = DenseLayer {
            w: Tensor2::identity(2),
            b: vec![0.0, 0.0],
            activation: Activation::Relu,
        };
        let (y, cache) = layer.forward(&Tensor2::row_vector(&[2.0, -5.0])).unwrap();
        assert_eq!(y.data(), &[2.0, 0.0]);
        let (_, dx) = layer
            .backward(&cache, &Tensor2::row_vector(&[1.0, 1.0]))
            .unwrap();
        assert_eq!(dx.data(), &[1.0, 0.0]);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let layer = DenseLayer::zeros(3, 2, Activation::Linear);
        assert!(matches!(
            layer.forward(&Tensor2::zeros(1, 4)),
            Err(NnError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn non_finite_input_is_an_error() {
        let layer = DenseLayer {
            w: Tensor2::identity(2),
            b: vec![0.0, 0.0],
            activation: Activation::Linear,
        };
        assert_eq!(
            layer
                .forward(&Tensor2::row_vector(&[f64::NAN, 0.0]))
                .unwrap_err(),
            NnError::NonFiniteValue {
                op: "dense_forward"
            }
        );
    }

    #[test]
    fn softmax_rows_are_stochastic() {
        let t = Tensor2::from_vec(2, 3, vec![1000.0, 0.0, -3.0, 0.1, 0.2, 0.3]).unwrap();
        let s = softmax_rows(&t);
        for r in 0..2 {
            assert!((s.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
