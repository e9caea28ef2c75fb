//! The five forecasting architectures behind one build/fit/predict surface,
//! so calibration and blending can treat models interchangeably.

use serde::{Deserialize, Serialize};

use crate::data::{FeatureSet, WindowedDataset, HORIZON};
use crate::error::{Error, Result};
use crate::nn::{
    train, train_with_validation, Activation, LayerSpec, Network, OptimizerKind, OptimizerSpec,
    RecurrentKind, TrainConfig, TrainReport,
};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArchitectureId {
    BiLstm,
    BiGru,
    CnnBiLstm,
    CnnBiLstmAtt,
    EncDecBiLstm,
}

impl ArchitectureId {
    pub const ALL: [ArchitectureId; 5] = [
        ArchitectureId::BiLstm,
        ArchitectureId::BiGru,
        ArchitectureId::CnnBiLstm,
        ArchitectureId::CnnBiLstmAtt,
        ArchitectureId::EncDecBiLstm,
    ];

    /// Display name used in model labels and reports.
    pub fn name(&self) -> &'static str {
        match self {
            ArchitectureId::BiLstm => "Bi-LSTM",
            ArchitectureId::BiGru => "Bi-GRU",
            ArchitectureId::CnnBiLstm => "CNN-Bi-LSTM",
            ArchitectureId::CnnBiLstmAtt => "CNN-Bi-LSTM-Att",
            ArchitectureId::EncDecBiLstm => "encoder-decoder-LSTM",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let norm = text.to_ascii_lowercase();
        match norm.as_str() {
            "bi-lstm" | "bilstm" => Ok(ArchitectureId::BiLstm),
            "bi-gru" | "bigru" => Ok(ArchitectureId::BiGru),
            "cnn-bi-lstm" | "cnnbilstm" => Ok(ArchitectureId::CnnBiLstm),
            "cnn-bi-lstm-att" | "cnnbilstmatt" => Ok(ArchitectureId::CnnBiLstmAtt),
            "encdec-bi-lstm" | "encoder-decoder-lstm" | "encdecbilstm" => {
                Ok(ArchitectureId::EncDecBiLstm)
            }
            _ => Err(Error::invalid_argument(format!("unknown architecture '{text}'"))),
        }
    }
}

/// One model's full training configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub learning_rate: f64,
    /// Hidden units are 2^hidden_exponent.
    pub hidden_exponent: u32,
    pub optimizer: OptimizerKind,
    pub dropout: f64,
    pub window: usize,
    pub features: FeatureSet,
}

impl HyperParams {
    pub fn hidden_units(&self) -> usize {
        1usize << self.hidden_exponent
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0001..=0.1).contains(&self.learning_rate) {
            return Err(Error::invalid_argument(format!(
                "learning rate {} outside [0.0001, 0.1]",
                self.learning_rate
            )));
        }
        if !(1..=8).contains(&self.hidden_exponent) {
            return Err(Error::invalid_argument(format!(
                "hidden exponent {} outside [1, 8]",
                self.hidden_exponent
            )));
        }
        if !(0.2..=0.5).contains(&self.dropout) {
            return Err(Error::invalid_argument(format!(
                "dropout {} outside [0.2, 0.5]",
                self.dropout
            )));
        }
        if !(3..=30).contains(&self.window) {
            return Err(Error::invalid_argument(format!(
                "window {} outside [3, 30]",
                self.window
            )));
        }
        Ok(())
    }

    pub fn optimizer_spec(&self) -> Result<OptimizerSpec> {
        OptimizerSpec::new(self.optimizer, self.learning_rate)
    }

    /// Feature prefix + architecture name, e.g. `SENT-Bi-GRU`.
    pub fn label(&self, arch: ArchitectureId) -> String {
        format!("{}{}", self.features.label_prefix(), arch.name())
    }
}

/// One model's test-set predictions: (N, HORIZON) in normalized units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastMatrix {
    pub values: Tensor,
    pub model_label: String,
}

impl ForecastMatrix {
    pub fn rows(&self) -> usize {
        self.values.shape()[0]
    }
}

/// A built (possibly trained) model.
pub struct Forecaster {
    pub arch: ArchitectureId,
    pub hp: HyperParams,
    pub feature_count: usize,
    net: Network,
}

/// Layer stack per architecture. Dropout at the calibrated rate follows
/// every recurrent and convolutional block; convolution channel counts ride
/// the same hidden-unit knob as the recurrent layers.
pub fn architecture_specs(arch: ArchitectureId, hp: &HyperParams) -> Vec<LayerSpec> {
    let h = hp.hidden_units();
    let drop = LayerSpec::Dropout { rate: hp.dropout };
    let head = LayerSpec::Dense {
        out_units: HORIZON,
        activation: Activation::Linear,
    };
    match arch {
        ArchitectureId::BiLstm | ArchitectureId::BiGru => {
            let kind = if arch == ArchitectureId::BiLstm {
                RecurrentKind::Lstm
            } else {
                RecurrentKind::Gru
            };
            vec![
                LayerSpec::Bidirectional {
                    kind,
                    hidden_units: h,
                },
                drop,
                LayerSpec::LastStep,
                LayerSpec::Dense {
                    out_units: h,
                    activation: Activation::Relu,
                },
                LayerSpec::Dense {
                    out_units: h,
                    activation: Activation::Relu,
                },
                head,
            ]
        }
        ArchitectureId::CnnBiLstm | ArchitectureId::CnnBiLstmAtt => {
            let mut specs = vec![
                LayerSpec::Conv1d {
                    channels: h,
                    kernel_size: 3,
                },
                drop.clone(),
                LayerSpec::Conv1d {
                    channels: h,
                    kernel_size: 3,
                },
                drop.clone(),
                LayerSpec::Bidirectional {
                    kind: RecurrentKind::Lstm,
                    hidden_units: h,
                },
                drop.clone(),
                LayerSpec::Bidirectional {
                    kind: RecurrentKind::Lstm,
                    hidden_units: h,
                },
                drop,
            ];
            if arch == ArchitectureId::CnnBiLstmAtt {
                specs.push(LayerSpec::DotAttention);
            } else {
                specs.push(LayerSpec::LastStep);
            }
            specs.push(head);
            specs
        }
        ArchitectureId::EncDecBiLstm => vec![
            LayerSpec::Bidirectional {
                kind: RecurrentKind::Lstm,
                hidden_units: h,
            },
            drop.clone(),
            LayerSpec::Bidirectional {
                kind: RecurrentKind::Lstm,
                hidden_units: h,
            },
            drop.clone(),
            LayerSpec::LastStep,
            LayerSpec::RepeatVector { steps: HORIZON },
            LayerSpec::LstmCell { hidden_units: h },
            drop,
            LayerSpec::Dense {
                out_units: 1,
                activation: Activation::Linear,
            },
            LayerSpec::SqueezeLast,
        ],
    }
}

pub fn build(arch: ArchitectureId, hp: &HyperParams, feature_count: usize) -> Result<Forecaster> {
    hp.validate()?;
    if feature_count != hp.features.feature_count() {
        return Err(Error::invalid_argument(format!(
            "feature count {feature_count} does not match feature set {:?}",
            hp.features
        )));
    }
    let net = Network::from_specs(&architecture_specs(arch, hp), feature_count)?;
    Ok(Forecaster {
        arch,
        hp: *hp,
        feature_count,
        net,
    })
}

impl Forecaster {
    pub fn label(&self) -> String {
        self.hp.label(self.arch)
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn network_mut(&mut self) -> &mut Network {
        &mut self.net
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        let shape = x.shape();
        if shape.len() != 3 || shape[1] != self.hp.window || shape[2] != self.feature_count {
            return Err(Error::ShapeMismatch {
                expected: vec![0, self.hp.window, self.feature_count],
                actual: shape.to_vec(),
            });
        }
        Ok(())
    }

    /// Train with an internal chronological validation carve.
    pub fn fit(&mut self, train_set: &WindowedDataset, config: &TrainConfig) -> Result<TrainReport> {
        self.check_input(&train_set.x)?;
        train(&mut self.net, &train_set.x, &train_set.y, config, &self.hp.optimizer_spec()?)
    }

    /// Train against an explicit validation set.
    pub fn fit_with_validation(
        &mut self,
        fit_set: &WindowedDataset,
        val_set: &WindowedDataset,
        config: &TrainConfig,
    ) -> Result<TrainReport> {
        self.check_input(&fit_set.x)?;
        self.check_input(&val_set.x)?;
        train_with_validation(
            &mut self.net,
            &fit_set.x,
            &fit_set.y,
            &val_set.x,
            &val_set.y,
            config,
            &self.hp.optimizer_spec()?,
        )
    }

    /// Deterministic inference: dropout off, one HORIZON-vector per window.
    pub fn predict(&mut self, x: &Tensor) -> Result<ForecastMatrix> {
        if x.shape()[0] == 0 {
            return Ok(ForecastMatrix {
                values: Tensor::zeros(&[0, HORIZON]),
                model_label: self.label(),
            });
        }
        self.check_input(x)?;
        let values = self.net.predict(x)?;
        values.require_shape(&[x.shape()[0], HORIZON])?;
        Ok(ForecastMatrix {
            values,
            model_label: self.label(),
        })
    }
}
