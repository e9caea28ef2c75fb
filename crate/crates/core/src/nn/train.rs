//! Mini-batch training loop with early stopping.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{mse_loss, Mode, Network, Optimizer, OptimizerSpec};
use crate::error::{Error, Result};
use crate::rng::{self, tags};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
    /// Chronologically last share of the training data held out for
    /// validation when `train` carves the split itself.
    pub validation_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 16,
            max_epochs: 100,
            patience: 10,
            seed: 0,
            validation_fraction: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::invalid_argument(
                "batch_size, max_epochs and patience must be positive",
            ));
        }
        if self.patience >= self.max_epochs {
            return Err(Error::invalid_argument(format!(
                "patience {} must be below max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 0.5) {
            return Err(Error::invalid_argument(format!(
                "validation_fraction must lie in (0, 0.5), got {}",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub best_validation_mse: f64,
    pub train_loss_curve: Vec<f64>,
}

/// Number of rows the internal carve holds out: at least one, otherwise the
/// floor of `n * fraction`.
pub fn validation_rows(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction).floor() as usize).max(1)
}

/// Train on `(x, y)` with the chronologically last
/// `validation_fraction` of the rows held out for early stopping.
pub fn train(
    net: &mut Network,
    x: &Tensor,
    y: &Tensor,
    config: &TrainConfig,
    optimizer: &OptimizerSpec,
) -> Result<TrainReport> {
    config.validate()?;
    let n = x.shape()[0];
    if n < 2 {
        return Err(Error::invalid_argument(format!(
            "training needs at least 2 samples, got {n}"
        )));
    }
    let n_val = validation_rows(n, config.validation_fraction);
    let n_fit = n - n_val;
    if n_fit == 0 {
        return Err(Error::invalid_argument("validation carve leaves no training rows"));
    }
    let x_fit = x.slice_rows(0, n_fit)?;
    let y_fit = y.slice_rows(0, n_fit)?;
    let x_val = x.slice_rows(n_fit, n)?;
    let y_val = y.slice_rows(n_fit, n)?;
    train_with_validation(net, &x_fit, &y_fit, &x_val, &y_val, config, optimizer)
}

/// Training loop against an explicit validation set. Parameters are
/// re-initialized from `config.seed`, mini-batches are reshuffled every
/// epoch (final short batch kept), and the network is restored to its
/// best-validation parameters before returning.
pub fn train_with_validation(
    net: &mut Network,
    x_fit: &Tensor,
    y_fit: &Tensor,
    x_val: &Tensor,
    y_val: &Tensor,
    config: &TrainConfig,
    optimizer_spec: &OptimizerSpec,
) -> Result<TrainReport> {
    config.validate()?;
    let n_fit = x_fit.shape()[0];
    let n_val = x_val.shape()[0];
    if n_fit == 0 || n_val == 0 {
        return Err(Error::invalid_argument("empty training or validation set"));
    }
    if y_fit.shape()[0] != n_fit || y_val.shape()[0] != n_val {
        return Err(Error::ShapeMismatch {
            expected: vec![n_fit],
            actual: vec![y_fit.shape()[0]],
        });
    }

    net.init_params(&mut rng::stream(config.seed, tags::TRAIN_INIT, 0));
    let mut shuffle_rng = rng::stream(config.seed, tags::TRAIN_SHUFFLE, 0);
    let mut dropout_rng = rng::stream(config.seed, tags::TRAIN_DROPOUT, 0);
    let mut optimizer = Optimizer::new(*optimizer_spec);

    let mut best_val = f64::INFINITY;
    let mut best_snapshot: Option<Vec<Tensor>> = None;
    let mut strikes = 0usize;
    let mut curve = Vec::new();
    let mut epochs_run = 0usize;

    let mut indices: Vec<usize> = (0..n_fit).collect();
    for epoch in 1..=config.max_epochs {
        indices.shuffle(&mut shuffle_rng);
        let mut sse = 0.0;
        let mut elems = 0usize;
        let mut any_finite = false;

        for chunk in indices.chunks(config.batch_size) {
            let xb = x_fit.gather_rows(chunk)?;
            let yb = y_fit.gather_rows(chunk)?;
            let out = net.forward(&xb, Mode::Train, &mut dropout_rng)?;
            let (loss, grad) = mse_loss(&out, &yb)?;
            if loss.is_finite() {
                any_finite = true;
            }
            sse += loss * yb.len() as f64;
            elems += yb.len();
            net.zero_grads();
            net.backward(&grad)?;
            optimizer.step(&mut net.params_mut())?;
        }
        if !any_finite {
            return Err(Error::Diverged { epoch });
        }
        curve.push(sse / elems as f64);
        epochs_run = epoch;

        let val_pred = net.predict(x_val)?;
        let (val_mse, _) = mse_loss(&val_pred, y_val)?;
        if val_mse < best_val {
            best_val = val_mse;
            best_snapshot = Some(net.snapshot());
            strikes = 0;
        } else {
            strikes += 1;
            if strikes >= config.patience {
                break;
            }
        }
    }

    if let Some(snapshot) = best_snapshot {
        net.restore(&snapshot)?;
    }
    Ok(TrainReport {
        epochs_run,
        best_validation_mse: best_val,
        train_loss_curve: curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, LayerSpec, OptimizerKind};

    fn line_dataset(n: usize) -> (Tensor, Tensor) {
        // y = 2 * mean(window) on a constant series: trivially learnable
        let x = Tensor::filled(&[n, 4, 1], 0.5);
        let y = Tensor::filled(&[n, 1], 1.0);
        (x, y)
    }

    fn head_net() -> Network {
        Network::from_specs(
            &[
                LayerSpec::LastStep,
                LayerSpec::Dense {
                    out_units: 1,
                    activation: Activation::Linear,
                },
            ],
            1,
        )
        .unwrap()
    }

    fn quick_config(seed: u64) -> TrainConfig {
        TrainConfig {
            batch_size: 4,
            max_epochs: 60,
            patience: 8,
            seed,
            validation_fraction: 0.25,
        }
    }

    #[test]
    fn constant_target_is_learned_to_near_zero_mse() {
        let (x, y) = line_dataset(24);
        let mut net = head_net();
        let spec = OptimizerSpec::new(OptimizerKind::Adam, 0.05).unwrap();
        let report = train(&mut net, &x, &y, &quick_config(5), &spec).unwrap();
        assert!(report.best_validation_mse < 1e-4, "val mse {}", report.best_validation_mse);
        assert!(report.epochs_run <= 60);
    }

    #[test]
    fn same_seed_gives_identical_reports() {
        let (x, y) = line_dataset(20);
        let spec = OptimizerSpec::new(OptimizerKind::RmsProp, 0.01).unwrap();
        let mut a = head_net();
        let mut b = head_net();
        let ra = train(&mut a, &x, &y, &quick_config(9), &spec).unwrap();
        let rb = train(&mut b, &x, &y, &quick_config(9), &spec).unwrap();
        assert_eq!(ra, rb);
        let pa = a.predict(&x).unwrap();
        let pb = b.predict(&x).unwrap();
        assert_eq!(pa.data(), pb.data());
    }

    #[test]
    fn patience_controls_epoch_count() {
        // A network with zero learning rate cannot improve after epoch 1:
        // the first epoch always improves from +inf, then patience runs out.
        let (x, y) = line_dataset(16);
        let mut net = head_net();
        let spec = OptimizerSpec::new(OptimizerKind::Sgd, 1e-30).unwrap();
        let config = TrainConfig {
            batch_size: 4,
            max_epochs: 50,
            patience: 3,
            seed: 3,
            validation_fraction: 0.25,
        };
        let report = train(&mut net, &x, &y, &config, &spec).unwrap();
        assert_eq!(report.epochs_run, 4);
    }

    #[test]
    fn divergent_training_reports_epoch() {
        let (x, y) = line_dataset(16);
        let mut net = head_net();
        // Absurd learning rate forces non-finite parameters immediately.
        let spec = OptimizerSpec::new(OptimizerKind::Sgd, 1e300).unwrap();
        let config = quick_config(1);
        match train(&mut net, &x, &y, &config, &spec) {
            Err(Error::Diverged { epoch }) => assert!(epoch >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn config_validation_rejects_bad_patience() {
        let config = TrainConfig {
            patience: 100,
            max_epochs: 100,
            ..TrainConfig::default()
        };
        assert!(config.validate().is_err());
    }
}
