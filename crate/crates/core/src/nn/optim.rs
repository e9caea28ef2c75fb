//! The seven first-order optimizers selectable by calibration.
//!
//! Update rules, with g the gradient, lr the learning rate, and state
//! initialized to zeros:
//!
//! SGD       p -= lr * g
//! RMSprop   v = 0.9 v + 0.1 g^2;            p -= lr * g / (sqrt(v) + eps)
//! Adagrad   v += g^2;                       p -= lr * g / (sqrt(v) + eps)
//! Adadelta  v = 0.95 v + 0.05 g^2;  d = sqrt(u + eps)/sqrt(v + eps) * g;
//!           u = 0.95 u + 0.05 d^2;          p -= lr * d
//! Adam      m = b1 m + (1-b1) g; v = b2 v + (1-b2) g^2;
//!           p -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
//! AdamW     the Adam step, then p -= lr * 0.01 * p   (decoupled decay)
//! Adamax    m = b1 m + (1-b1) g; u = max(b2 u, |g|);
//!           p -= lr / (1-b1^t) * m / (u + eps)
//!
//! Constants are fixed at b1 = 0.9, b2 = 0.999, eps = 1e-8.

use serde::{Deserialize, Serialize};

use super::Param;
use crate::error::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;
pub const RMSPROP_RHO: f64 = 0.9;
pub const ADADELTA_RHO: f64 = 0.95;
pub const ADAMW_DECAY: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimizerKind {
    Sgd,
    RmsProp,
    Adagrad,
    Adadelta,
    AdamW,
    Adam,
    Adamax,
}

impl OptimizerKind {
    /// Selection order used by the categorical calibration dimension.
    pub const ALL: [OptimizerKind; 7] = [
        OptimizerKind::Sgd,
        OptimizerKind::RmsProp,
        OptimizerKind::Adagrad,
        OptimizerKind::Adadelta,
        OptimizerKind::AdamW,
        OptimizerKind::Adam,
        OptimizerKind::Adamax,
    ];

    pub fn from_index(index: usize) -> Result<Self> {
        Self::ALL
            .get(index)
            .copied()
            .ok_or_else(|| Error::invalid_argument(format!("optimizer index {index} out of range")))
    }

    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "SGD",
            OptimizerKind::RmsProp => "RMSprop",
            OptimizerKind::Adagrad => "Adagrad",
            OptimizerKind::Adadelta => "Adadelta",
            OptimizerKind::AdamW => "AdamW",
            OptimizerKind::Adam => "Adam",
            OptimizerKind::Adamax => "Adamax",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
}

impl OptimizerSpec {
    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Result<Self> {
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return Err(Error::invalid_argument(format!(
                "learning rate must be positive, got {learning_rate}"
            )));
        }
        Ok(OptimizerSpec {
            kind,
            learning_rate,
        })
    }
}

struct ParamState {
    m: Vec<f64>,
    v: Vec<f64>,
}

/// Stateful stepper over a fixed parameter list; the state slot at index `i`
/// always belongs to the i-th parameter tensor handed to `step`.
pub struct Optimizer {
    spec: OptimizerSpec,
    t: u64,
    state: Vec<ParamState>,
}

impl Optimizer {
    pub fn new(spec: OptimizerSpec) -> Self {
        Optimizer {
            spec,
            t: 0,
            state: Vec::new(),
        }
    }

    pub fn spec(&self) -> &OptimizerSpec {
        &self.spec
    }

    pub fn step(&mut self, params: &mut [&mut Param]) -> Result<()> {
        if self.state.is_empty() {
            self.state = params
                .iter()
                .map(|p| ParamState {
                    m: vec![0.0; p.value.len()],
                    v: vec![0.0; p.value.len()],
                })
                .collect();
        }
        if self.state.len() != params.len() {
            return Err(Error::invalid_state(format!(
                "optimizer tracks {} tensors, step got {}",
                self.state.len(),
                params.len()
            )));
        }
        self.t += 1;
        let lr = self.spec.learning_rate;
        let t = self.t as i32;

        for (param, state) in params.iter_mut().zip(&mut self.state) {
            if param.value.len() != state.m.len() {
                return Err(Error::invalid_state(
                    "parameter tensor changed size under the optimizer",
                ));
            }
            let values = param.value.data_mut();
            let grads = param.grad.data();
            match self.spec.kind {
                OptimizerKind::Sgd => {
                    for (p, &g) in values.iter_mut().zip(grads) {
                        *p -= lr * g;
                    }
                }
                OptimizerKind::RmsProp => {
                    for ((p, &g), v) in values.iter_mut().zip(grads).zip(&mut state.v) {
                        *v = RMSPROP_RHO * *v + (1.0 - RMSPROP_RHO) * g * g;
                        *p -= lr * g / (v.sqrt() + EPSILON);
                    }
                }
                OptimizerKind::Adagrad => {
                    for ((p, &g), v) in values.iter_mut().zip(grads).zip(&mut state.v) {
                        *v += g * g;
                        *p -= lr * g / (v.sqrt() + EPSILON);
                    }
                }
                OptimizerKind::Adadelta => {
                    for (((p, &g), v), u) in values
                        .iter_mut()
                        .zip(grads)
                        .zip(&mut state.v)
                        .zip(&mut state.m)
                    {
                        *v = ADADELTA_RHO * *v + (1.0 - ADADELTA_RHO) * g * g;
                        let d = (*u + EPSILON).sqrt() / (*v + EPSILON).sqrt() * g;
                        *u = ADADELTA_RHO * *u + (1.0 - ADADELTA_RHO) * d * d;
                        *p -= lr * d;
                    }
                }
                OptimizerKind::Adam | OptimizerKind::AdamW => {
                    let bc1 = 1.0 - BETA1.powi(t);
                    let bc2 = 1.0 - BETA2.powi(t);
                    let decay = if self.spec.kind == OptimizerKind::AdamW {
                        ADAMW_DECAY
                    } else {
                        0.0
                    };
                    for (((p, &g), m), v) in values
                        .iter_mut()
                        .zip(grads)
                        .zip(&mut state.m)
                        .zip(&mut state.v)
                    {
                        *m = BETA1 * *m + (1.0 - BETA1) * g;
                        *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                        let m_hat = *m / bc1;
                        let v_hat = *v / bc2;
                        *p -= lr * m_hat / (v_hat.sqrt() + EPSILON);
                        *p -= lr * decay * *p;
                    }
                }
                OptimizerKind::Adamax => {
                    let bc1 = 1.0 - BETA1.powi(t);
                    for (((p, &g), m), u) in values
                        .iter_mut()
                        .zip(grads)
                        .zip(&mut state.m)
                        .zip(&mut state.v)
                    {
                        *m = BETA1 * *m + (1.0 - BETA1) * g;
                        *u = (BETA2 * *u).max(g.abs());
                        *p -= lr / bc1 * *m / (*u + EPSILON);
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn scalar_param(value: f64) -> Param {
        let mut p = Param::new("p", &[1], 1);
        p.value = Tensor::from_vec(&[1], vec![value]).unwrap();
        p
    }

    fn step_once(kind: OptimizerKind, lr: f64, value: f64, grad: f64) -> f64 {
        let mut p = scalar_param(value);
        p.grad = Tensor::from_vec(&[1], vec![grad]).unwrap();
        let mut opt = Optimizer::new(OptimizerSpec::new(kind, lr).unwrap());
        opt.step(&mut [&mut p]).unwrap();
        p.value.data()[0]
    }

    #[test]
    fn sgd_is_plain_gradient_descent() {
        assert!((step_once(OptimizerKind::Sgd, 0.1, 0.0, 1.0) - (-0.1)).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point_except_adamw() {
        for kind in OptimizerKind::ALL {
            let after = step_once(kind, 0.05, 1.25, 0.0);
            if kind == OptimizerKind::AdamW {
                let expected = 1.25 * (1.0 - 0.05 * ADAMW_DECAY);
                assert!(
                    (after - expected).abs() < 1e-15,
                    "{kind:?} decayed to {after}, expected {expected}"
                );
            } else {
                assert_eq!(after, 1.25, "{kind:?} moved a parameter with zero gradient");
            }
        }
    }

    #[test]
    fn adam_first_step_magnitude_is_about_lr() {
        let g = 0.37;
        let after = step_once(OptimizerKind::Adam, 0.01, 0.0, g);
        // first bias-corrected iterate reduces to lr * g / (|g| + eps)
        let expected = -0.01 * g / (g.abs() + EPSILON);
        assert!((after - expected).abs() < 1e-12);
        assert!((after.abs() - 0.01).abs() < 1e-6);
    }

    #[test]
    fn unknown_index_is_rejected() {
        assert!(OptimizerKind::from_index(7).is_err());
        assert_eq!(OptimizerKind::from_index(4).unwrap(), OptimizerKind::AdamW);
    }

    #[test]
    fn invalid_learning_rate_is_rejected() {
        assert!(OptimizerSpec::new(OptimizerKind::Adam, 0.0).is_err());
        assert!(OptimizerSpec::new(OptimizerKind::Adam, -0.5).is_err());
        assert!(OptimizerSpec::new(OptimizerKind::Adam, f64::NAN).is_err());
    }
}
