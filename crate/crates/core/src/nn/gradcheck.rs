//! Finite-difference verification of analytic gradients.

use super::{mse_loss, Mode, Network};
use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::Tensor;

/// Compare every parameter's analytic gradient against the central
/// difference `(f(p+eps) - f(p-eps)) / 2eps` of the MSE loss and return the
/// maximum relative error `|a - n| / max(|a|, |n|, 1e-12)`.
///
/// Every forward pass runs in train mode with the dropout stream re-seeded
/// from `seed`, so masks are pinned across the analytic and numeric
/// evaluations.
pub fn grad_check(
    net: &mut Network,
    input: &Tensor,
    target: &Tensor,
    eps: f64,
    seed: u64,
) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&eps) {
        return Err(Error::invalid_argument(format!(
            "grad_check step must lie in [1e-7, 1e-3], got {eps}"
        )));
    }

    let fresh_rng = || rng::stream(seed, rng::tags::TRAIN_DROPOUT, 0);

    net.zero_grads();
    let out = net.forward(input, Mode::Train, &mut fresh_rng())?;
    let (_, dloss) = mse_loss(&out, target)?;
    net.backward(&dloss)?;
    let analytic: Vec<Vec<f64>> = net.params().iter().map(|p| p.grad.data().to_vec()).collect();

    let mut max_rel = 0.0f64;
    let n_tensors = analytic.len();
    for pi in 0..n_tensors {
        let n_elems = analytic[pi].len();
        for ei in 0..n_elems {
            let original = net.params()[pi].value.data()[ei];

            net.params_mut()[pi].value.data_mut()[ei] = original + eps;
            let out = net.forward(input, Mode::Train, &mut fresh_rng())?;
            let (loss_plus, _) = mse_loss(&out, target)?;

            net.params_mut()[pi].value.data_mut()[ei] = original - eps;
            let out = net.forward(input, Mode::Train, &mut fresh_rng())?;
            let (loss_minus, _) = mse_loss(&out, target)?;

            net.params_mut()[pi].value.data_mut()[ei] = original;

            let numeric = (loss_plus - loss_minus) / (2.0 * eps);
            let a = analytic[pi][ei];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-12);
            if rel > max_rel {
                max_rel = rel;
            }
        }
    }
    Ok(max_rel)
}
