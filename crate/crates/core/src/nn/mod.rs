//! Desk-scale neural network kit: layers, losses, optimizers, and a training
//! loop with early stopping. Everything runs in 64-bit arithmetic so analytic
//! gradients can be held to tight finite-difference tolerances.

mod attention;
mod conv;
mod dense;
mod dropout;
mod gradcheck;
mod loss;
mod network;
mod optim;
mod recurrent;
mod serialize;
mod shape;
mod train;

pub use attention::DotAttention;
pub use conv::Conv1d;
pub use dense::Dense;
pub use dropout::Dropout;
pub use gradcheck::grad_check;
pub use loss::mse_loss;
pub use network::Network;
pub use optim::{Optimizer, OptimizerKind, OptimizerSpec};
pub use recurrent::{Bidirectional, GruCell, LstmCell, RecurrentKind};
pub use serialize::{NamedTensor, ParamManifest};
pub use shape::{LastStep, RepeatVector, SqueezeLast};
pub use train::{train, train_with_validation, validation_rows, TrainConfig, TrainReport};

use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::tensor::Tensor;

/// Forward-pass mode: training caches state for backprop and activates
/// dropout; inference is pure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Activation applied inside dense and convolutional layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Linear => x,
        }
    }

    /// Derivative given the pre-activation value.
    pub fn grad(&self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

/// One trainable tensor plus its gradient accumulator.
#[derive(Debug, Clone)]
pub struct Param {
    pub name: &'static str,
    pub value: Tensor,
    pub grad: Tensor,
    /// Half-width of the uniform init interval; zero-initialized when 0
    /// (biases).
    pub init_bound: f64,
}

impl Param {
    pub fn new(name: &'static str, shape: &[usize], fan_in: usize) -> Self {
        let bound = if fan_in == 0 {
            0.0
        } else {
            1.0 / (fan_in as f64).sqrt()
        };
        Param {
            name,
            value: Tensor::zeros(shape),
            grad: Tensor::zeros(shape),
            init_bound: bound,
        }
    }

    pub fn init(&mut self, rng: &mut StreamRng) {
        if self.init_bound == 0.0 {
            self.value.fill(0.0);
        } else {
            let b = self.init_bound;
            for v in self.value.data_mut() {
                *v = crate::rng::uniform(rng, -b, b);
            }
        }
    }
}

/// A differentiable computation stage. `forward` in train mode caches what
/// `backward` needs; `backward` consumes the cache, accumulates parameter
/// gradients, and returns the gradient with respect to its input.
pub trait Layer: Send {
    fn forward(&mut self, input: &Tensor, mode: Mode, rng: &mut StreamRng) -> Result<Tensor>;
    fn backward(&mut self, upstream: &Tensor) -> Result<Tensor>;
    fn params(&self) -> Vec<&Param>;
    fn params_mut(&mut self) -> Vec<&mut Param>;

    fn zero_grads(&mut self) {
        for p in self.params_mut() {
            p.grad.fill(0.0);
        }
    }
}

pub(crate) fn missing_forward_state(layer: &str) -> Error {
    Error::invalid_state(format!(
        "{layer}: backward called without a preceding train-mode forward pass"
    ))
}

/// Declarative layer description; `Network::from_specs` threads feature
/// counts through a stack of these.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerSpec {
    Dense {
        out_units: usize,
        activation: Activation,
    },
    LstmCell {
        hidden_units: usize,
    },
    GruCell {
        hidden_units: usize,
    },
    Bidirectional {
        kind: RecurrentKind,
        hidden_units: usize,
    },
    Conv1d {
        channels: usize,
        kernel_size: usize,
    },
    DotAttention,
    Dropout {
        rate: f64,
    },
    /// Select the final time step: (batch, time, f) -> (batch, f).
    LastStep,
    /// Repeat a feature vector over a new time axis of the given length.
    RepeatVector {
        steps: usize,
    },
    /// Drop a trailing singleton axis: (batch, time, 1) -> (batch, time).
    SqueezeLast,
}

impl LayerSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LayerSpec::Dense { out_units, .. } => {
                if out_units == 0 {
                    return Err(Error::invalid_argument("dense layer needs out_units >= 1"));
                }
            }
            LayerSpec::LstmCell { hidden_units }
            | LayerSpec::GruCell { hidden_units }
            | LayerSpec::Bidirectional { hidden_units, .. } => {
                if hidden_units == 0 {
                    return Err(Error::invalid_argument("recurrent layer needs hidden_units >= 1"));
                }
            }
            LayerSpec::Conv1d { channels, kernel_size } => {
                if channels == 0 {
                    return Err(Error::invalid_argument("conv layer needs channels >= 1"));
                }
                if kernel_size % 2 == 0 {
                    return Err(Error::invalid_argument(format!(
                        "kernel_size must be odd for symmetric same-padding, got {kernel_size}"
                    )));
                }
            }
            LayerSpec::Dropout { rate } => {
                if !(0.0..1.0).contains(&rate) {
                    return Err(Error::invalid_argument(format!(
                        "dropout rate must lie in [0, 1), got {rate}"
                    )));
                }
            }
            LayerSpec::RepeatVector { steps } => {
                if steps == 0 {
                    return Err(Error::invalid_argument("repeat_vector needs steps >= 1"));
                }
            }
            LayerSpec::DotAttention | LayerSpec::LastStep | LayerSpec::SqueezeLast => {}
        }
        Ok(())
    }
}
