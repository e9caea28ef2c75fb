//! Training loss.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Mean squared error and its gradient with respect to the prediction:
/// `L = sum((pred - target)^2) / N`, `dL/dpred = 2 (pred - target) / N`.
pub fn mse_loss(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    if pred.shape() != target.shape() {
        return Err(Error::ShapeMismatch {
            expected: target.shape().to_vec(),
            actual: pred.shape().to_vec(),
        });
    }
    if pred.is_empty() {
        return Err(Error::invalid_argument("mse_loss on empty tensors"));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let mut grad = Tensor::zeros(pred.shape());
    for ((g, &p), &t) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()) {
        let d = p - t;
        loss += d * d;
        *g = 2.0 * d / n;
    }
    Ok((loss / n, grad))
}
