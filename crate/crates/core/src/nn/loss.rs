use super::dense::softmax_rows;
use super::tensor::Tensor2;
use super::NnError;

/// Fused softmax + categorical cross-entropy, averaged over the batch.
/// Returns the loss and its gradient with respect to the logits.
pub fn softmax_xent(logits: &Tensor2, onehot: &Tensor2) -> Result<(f64, Tensor2), NnError> {
    logits.same_shape(onehot, "softmax_xent")?;
    logits.ensure_finite("softmax_xent")?;
    let batch = logits.rows() as f64;
    let probs = softmax_rows(logits);
    let mut loss = 0.0;
    let mut grad = probs.clone();
    for r in 0..logits.rows() {
        let z = logits.row(r);
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        for (c, &y) in onehot.row(r).iter().enumerate() {
            if y != 0.0 {
                loss -= y * (z[c] - lse);
            }
        }
        for (g, &y) in grad.row_mut(r).iter_mut().zip(onehot.row(r)) {
            *g = (*g - y) / batch;
        }
    }
    Ok((loss / batch, grad))
}

/// Mean squared error and its gradient `2 (pred - target) / n`.
pub fn mse_loss(pred: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>), NnError> {
    if pred.len() != targets.len() || pred.is_empty() {
        return Err(NnError::ShapeMismatch {
            op: "mse_loss",
            expected: format!("{} values", targets.len()),
            got: format!("{} values", pred.len()),
        });
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(pred.len());
    for (p, t) in pred.iter().zip(targets) {
        let d = p - t;
        loss += d * d;
        grad.push(2.0 * d / n);
    }
    Ok((loss / n, grad))
}
