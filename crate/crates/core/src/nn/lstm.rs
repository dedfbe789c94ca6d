//! Single-layer LSTM over a fixed-length sequence. Only the final hidden state
//! is exposed; gates are stacked in the order input, forget, candidate, output.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dense::sigmoid;
use super::tensor::{ensure_finite, Tensor2};
use super::NnError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCell {
    /// `4H x input` input-to-gate weights.
    pub w_x: Tensor2,
    /// `4H x H` recurrent weights.
    pub w_h: Tensor2,
    /// `4H` gate biases.
    pub b: Vec<f64>,
    pub hidden_size: usize,
}

#[derive(Debug, Clone)]
pub struct LstmCache {
    inputs: Tensor2,
    /// Per step, post-nonlinearity gates `[i, f, g, o]` (4H each).
    gates: Vec<Vec<f64>>,
    /// Cell states c_0 .. c_T (c_0 = 0).
    cells: Vec<Vec<f64>>,
    /// Hidden states h_0 .. h_T (h_0 = 0).
    hiddens: Vec<Vec<f64>>,
}

impl LstmCache {
    pub fn final_hidden(&self) -> &[f64] {
        self.hiddens.last().expect("h_0 always present")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmGrads {
    pub w_x: Tensor2,
    pub w_h: Tensor2,
    pub b: Vec<f64>,
}

impl LstmCell {
    /// Glorot-uniform weights on each gate block, zero biases.
    pub fn glorot<R: Rng + ?Sized>(input_size: usize, hidden_size: usize, rng: &mut R) -> Self {
        let gates = 4 * hidden_size;
        let lim_x = (6.0 / (input_size + hidden_size) as f64).sqrt();
        let lim_h = (6.0 / (2 * hidden_size) as f64).sqrt();
        let w_x = (0..gates * input_size)
            .map(|_| rng.random_range(-lim_x..lim_x))
            .collect();
        let w_h = (0..gates * hidden_size)
            .map(|_| rng.random_range(-lim_h..lim_h))
            .collect();
        Self {
            w_x: Tensor2::from_vec(gates, input_size, w_x).expect("sized above"),
            w_h: Tensor2::from_vec(gates, hidden_size, w_h).expect("sized above"),
            b: vec![0.0; gates],
            hidden_size,
        }
    }

    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        Self {
            w_x: Tensor2::zeros(4 * hidden_size, input_size),
            w_h: Tensor2::zeros(4 * hidden_size, hidden_size),
            b: vec![0.0; 4 * hidden_size],
            hidden_size,
        }
    }

    pub fn input_size(&self) -> usize {
        self.w_x.cols()
    }

    pub fn param_count(&self) -> usize {
        self.w_x.data().len() + self.w_h.data().len() + self.b.len()
    }

    /// Runs the recurrence over the rows of `sequence` (`T x input`).
    pub fn forward(
        &self,
        sequence: &Tensor2,
        expected_len: Option<usize>,
    ) -> Result<(Vec<f64>, LstmCache), NnError> {
        let h = self.hidden_size;
        if sequence.cols() != self.input_size()
            || expected_len.is_some_and(|t| t != sequence.rows())
        {
            return Err(NnError::ShapeMismatch {
                op: "lstm_forward",
                expected: format!(
                    "{}x{}",
                    expected_len.map_or("T".into(), |t| t.to_string()),
                    self.input_size()
                ),
                got: format!("{}x{}", sequence.rows(), sequence.cols()),
            });
        }
        sequence.ensure_finite("lstm_forward")?;

        let steps = sequence.rows();
        let mut gates_all = Vec::with_capacity(steps);
        let mut cells = Vec::with_capacity(steps + 1);
        let mut hiddens = Vec::with_capacity(steps + 1);
        cells.push(vec![0.0; h]);
        hiddens.push(vec![0.0; h]);

        for t in 0..steps {
            let x = sequence.row(t);
            let h_prev = &hiddens[t];
            let mut z = self.b.clone();
            for (g, zg) in z.iter_mut().enumerate() {
                let wx = self.w_x.row(g);
                for (w, xi) in wx.iter().zip(x) {
                    if *xi != 0.0 {
                        *zg += w * xi;
                    }
                }
                let wh = self.w_h.row(g);
                *zg += wh.iter().zip(h_prev).map(|(w, hv)| w * hv).sum::<f64>();
            }
            for j in 0..h {
                z[j] = sigmoid(z[j]);
                z[h + j] = sigmoid(z[h + j]);
                z[2 * h + j] = z[2 * h + j].tanh();
                z[3 * h + j] = sigmoid(z[3 * h + j]);
            }
            let c_prev = &cells[t];
            let c: Vec<f64> = (0..h)
                .map(|j| z[h + j] * c_prev[j] + z[j] * z[2 * h + j])
                .collect();
            let h_new: Vec<f64> = (0..h).map(|j| z[3 * h + j] * c[j].tanh()).collect();
            ensure_finite(&h_new, "lstm_forward")?;
            gates_all.push(z);
            cells.push(c);
            hiddens.push(h_new);
        }

        let out = hiddens[steps].clone();
        Ok((
            out,
            LstmCache {
                inputs: sequence.clone(),
                gates: gates_all,
                cells,
                hiddens,
            },
        ))
    }

    /// Backpropagation through time from `dL/dh_T`.
    pub fn backward(&self, cache: &LstmCache, upstream: &[f64]) -> Result<LstmGrads, NnError> {
        let h = self.hidden_size;
        if upstream.len() != h {
            return Err(NnError::ShapeMismatch {
                op: "lstm_backward",
                expected: format!("{h} values"),
                got: format!("{} values", upstream.len()),
            });
        }
        let mut grads = LstmGrads {
            w_x: Tensor2::zeros(4 * h, self.input_size()),
            w_h: Tensor2::zeros(4 * h, h),
            b: vec![0.0; 4 * h],
        };
        let mut dh = upstream.to_vec();
        let mut dc = vec![0.0; h];
        let mut dz = vec![0.0; 4 * h];

        for t in (0..cache.gates.len()).rev() {
            let gates = &cache.gates[t];
            let c = &cache.cells[t + 1];
            let c_prev = &cache.cells[t];
            let h_prev = &cache.hiddens[t];
            for j in 0..h {
                let (i, f, g, o) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
                let tc = c[j].tanh();
                let do_ = dh[j] * tc;
                dc[j] += dh[j] * o * (1.0 - tc * tc);
                let di = dc[j] * g;
                let df = dc[j] * c_prev[j];
                let dg = dc[j] * i;
                dz[j] = di * i * (1.0 - i);
                dz[h + j] = df * f * (1.0 - f);
                dz[2 * h + j] = dg * (1.0 - g * g);
                dz[3 * h + j] = do_ * o * (1.0 - o);
                dc[j] *= f;
            }

            let x = cache.inputs.row(t);
            for (gi, &dzg) in dz.iter().enumerate() {
                if dzg == 0.0 {
                    continue;
                }
                grads.b[gi] += dzg;
                for (acc, xi) in grads.w_x.row_mut(gi).iter_mut().zip(x) {
                    *acc += dzg * xi;
                }
                for (acc, hv) in grads.w_h.row_mut(gi).iter_mut().zip(h_prev) {
                    *acc += dzg * hv;
                }
            }
            dh.iter_mut().for_each(|v| *v = 0.0);
            for (gi, &dzg) in dz.iter().enumerate() {
                if dzg == 0.0 {
                    continue;
                }
                for (acc, w) in dh.iter_mut().zip(self.w_h.row(gi)) {
                    *acc += dzg * w;
                }
            }
        }

        grads.w_x.ensure_finite("lstm_backward")?;
        grads.w_h.ensure_finite("lstm_backward")?;
        ensure_finite(&grads.b, "lstm_backward")?;
        Ok(grads)
    }
}
