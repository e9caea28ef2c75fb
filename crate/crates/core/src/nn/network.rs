//! Sequential network container.

use super::{
    Activation, Bidirectional, Conv1d, Dense, DotAttention, Dropout, LastStep, Layer, LayerSpec,
    Mode, Param, RepeatVector, SqueezeLast,
};
use super::{GruCell, LstmCell};
use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::tensor::Tensor;

/// Feature layout flowing between layers while building from specs.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Flow {
    /// (batch, time, features)
    Sequence(usize),
    /// (batch, features)
    Vector(usize),
}

pub struct Network {
    layers: Vec<Box<dyn Layer>>,
}

impl Network {
    pub fn new() -> Self {
        Network { layers: Vec::new() }
    }

    pub fn push(&mut self, layer: Box<dyn Layer>) {
        self.layers.push(layer);
    }

    /// Build a sequential network from layer specs, threading the feature
    /// count from `in_features` through every stage. Inputs are sequences
    /// (batch, time, in_features).
    pub fn from_specs(specs: &[LayerSpec], in_features: usize) -> Result<Self> {
        if in_features == 0 {
            return Err(Error::invalid_argument("in_features must be >= 1"));
        }
        let mut flow = Flow::Sequence(in_features);
        let mut net = Network::new();
        for spec in specs {
            spec.validate()?;
            let features = match flow {
                Flow::Sequence(f) | Flow::Vector(f) => f,
            };
            match *spec {
                LayerSpec::Dense { out_units, activation } => {
                    net.push(Box::new(Dense::new(features, out_units, activation)));
                    flow = match flow {
                        Flow::Sequence(_) => Flow::Sequence(out_units),
                        Flow::Vector(_) => Flow::Vector(out_units),
                    };
                }
                LayerSpec::LstmCell { hidden_units } => {
                    require_sequence(flow, "lstm")?;
                    net.push(Box::new(LstmCell::new(features, hidden_units)));
                    flow = Flow::Sequence(hidden_units);
                }
                LayerSpec::GruCell { hidden_units } => {
                    require_sequence(flow, "gru")?;
                    net.push(Box::new(GruCell::new(features, hidden_units)));
                    flow = Flow::Sequence(hidden_units);
                }
                LayerSpec::Bidirectional { kind, hidden_units } => {
                    require_sequence(flow, "bidirectional")?;
                    net.push(Box::new(Bidirectional::new(kind, features, hidden_units)));
                    flow = Flow::Sequence(2 * hidden_units);
                }
                LayerSpec::Conv1d { channels, kernel_size } => {
                    require_sequence(flow, "conv1d")?;
                    net.push(Box::new(Conv1d::new(features, channels, kernel_size, Activation::Relu)));
                    flow = Flow::Sequence(channels);
                }
                LayerSpec::DotAttention => {
                    require_sequence(flow, "attention")?;
                    net.push(Box::new(DotAttention::new()));
                    flow = Flow::Vector(features);
                }
                LayerSpec::Dropout { rate } => {
                    net.push(Box::new(Dropout::new(rate)));
                }
                LayerSpec::LastStep => {
                    require_sequence(flow, "last_step")?;
                    net.push(Box::new(LastStep::new()));
                    flow = Flow::Vector(features);
                }
                LayerSpec::RepeatVector { steps } => {
                    if let Flow::Sequence(_) = flow {
                        return Err(Error::invalid_argument(
                            "repeat_vector needs a flat feature vector, got a sequence",
                        ));
                    }
                    net.push(Box::new(RepeatVector::new(steps)));
                    flow = Flow::Sequence(features);
                }
                LayerSpec::SqueezeLast => {
                    require_sequence(flow, "squeeze")?;
                    if features != 1 {
                        return Err(Error::invalid_argument(format!(
                            "squeeze expects a single trailing feature, got {features}"
                        )));
                    }
                    net.push(Box::new(SqueezeLast::new()));
                    flow = Flow::Vector(0);
                }
            }
        }
        Ok(net)
    }

    pub fn forward(&mut self, input: &Tensor, mode: Mode, rng: &mut StreamRng) -> Result<Tensor> {
        let mut x = input.clone();
        for layer in &mut self.layers {
            x = layer.forward(&x, mode, rng)?;
        }
        Ok(x)
    }

    /// Backpropagate the loss gradient; parameter gradients accumulate into
    /// each layer's `Param::grad`.
    pub fn backward(&mut self, loss_grad: &Tensor) -> Result<Tensor> {
        let mut g = loss_grad.clone();
        for layer in self.layers.iter_mut().rev() {
            g = layer.backward(&g)?;
        }
        Ok(g)
    }

    pub fn params(&self) -> Vec<&Param> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    pub fn zero_grads(&mut self) {
        for layer in &mut self.layers {
            layer.zero_grads();
        }
    }

    /// Draw fresh parameter values: uniform in +-1/sqrt(fan_in) per tensor,
    /// biases zeroed. Iteration order is layer order, so the same rng state
    /// always produces the same network.
    pub fn init_params(&mut self, rng: &mut StreamRng) {
        for p in self.params_mut() {
            p.init(rng);
        }
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }

    pub fn snapshot(&self) -> Vec<Tensor> {
        self.params().iter().map(|p| p.value.clone()).collect()
    }

    pub fn restore(&mut self, snapshot: &[Tensor]) -> Result<()> {
        let mut params = self.params_mut();
        if params.len() != snapshot.len() {
            return Err(Error::invalid_state(format!(
                "snapshot holds {} tensors, network has {}",
                snapshot.len(),
                params.len()
            )));
        }
        for (p, s) in params.iter_mut().zip(snapshot) {
            p.value.require_shape(s.shape())?;
            p.value = s.clone();
        }
        Ok(())
    }

    /// Pure inference pass: dropout disabled, no state cached.
    pub fn predict(&mut self, input: &Tensor) -> Result<Tensor> {
        let mut rng = crate::rng::stream(0, 0, 0);
        self.forward(input, Mode::Infer, &mut rng)
    }
}

impl Default for Network {
    fn default() -> Self {
        Self::new()
    }
}

fn require_sequence(flow: Flow, what: &str) -> Result<()> {
    match flow {
        Flow::Sequence(_) => Ok(()),
        Flow::Vector(_) => Err(Error::invalid_argument(format!(
            "{what} needs sequence input (batch, time, features)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::RecurrentKind;
    use crate::rng;

    #[test]
    fn builder_threads_feature_counts() {
        let specs = [
            LayerSpec::Bidirectional {
                kind: RecurrentKind::Gru,
                hidden_units: 4,
            },
            LayerSpec::Dropout { rate: 0.2 },
            LayerSpec::LastStep,
            LayerSpec::Dense {
                out_units: 3,
                activation: Activation::Linear,
            },
        ];
        let mut net = Network::from_specs(&specs, 2).unwrap();
        let mut r = rng::stream(1, rng::tags::TRAIN_INIT, 0);
        net.init_params(&mut r);
        let x = Tensor::filled(&[5, 7, 2], 0.1);
        let y = net.predict(&x).unwrap();
        assert_eq!(y.shape(), &[5, 3]);
    }

    #[test]
    fn builder_rejects_recurrent_after_flatten() {
        let specs = [
            LayerSpec::LastStep,
            LayerSpec::GruCell { hidden_units: 4 },
        ];
        assert!(Network::from_specs(&specs, 2).is_err());
    }

    #[test]
    fn snapshot_restore_round_trips() {
        let specs = [
            LayerSpec::LstmCell { hidden_units: 3 },
            LayerSpec::LastStep,
            LayerSpec::Dense {
                out_units: 1,
                activation: Activation::Linear,
            },
        ];
        let mut net = Network::from_specs(&specs, 2).unwrap();
        let mut r = rng::stream(2, rng::tags::TRAIN_INIT, 0);
        net.init_params(&mut r);
        let saved = net.snapshot();
        let x = Tensor::filled(&[2, 4, 2], 0.3);
        let before = net.predict(&x).unwrap();
        net.init_params(&mut r);
        let changed = net.predict(&x).unwrap();
        assert_ne!(before.data(), changed.data());
        net.restore(&saved).unwrap();
        let after = net.predict(&x).unwrap();
        assert_eq!(before.data(), after.data());
    }
}
