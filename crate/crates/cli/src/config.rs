//! Run configuration: one JSON file drives every stage.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wolfcast_core::data::sha256_str;
use wolfcast_core::forecasters::ArchitectureId;
use wolfcast_core::metrics::MspeMode;
use wolfcast_core::nn::TrainConfig;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataPaths {
    pub brent: PathBuf,
    pub usdx: PathBuf,
    pub sent: PathBuf,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub validation_fraction: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            test_fraction: 0.2,
            validation_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GwoSettings {
    pub pop_size: usize,
    pub iterations: usize,
    pub runs: usize,
}

impl Default for GwoSettings {
    fn default() -> Self {
        GwoSettings {
            pop_size: 10,
            iterations: 30,
            runs: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrainSettings {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            batch_size: 16,
            max_epochs: 100,
            patience: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MspeFormula {
    #[default]
    Percentage,
    Printed,
}

impl MspeFormula {
    pub fn mode(&self) -> MspeMode {
        match self {
            MspeFormula::Percentage => MspeMode::Percentage,
            MspeFormula::Printed => MspeMode::PlainSquared,
        }
    }
}

/// Published benchmark values printed alongside computed metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceBenchmarks {
    pub ensemble_mse: f64,
    pub models: Vec<ReferenceModel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceModel {
    pub label: String,
    pub mse: f64,
    pub window: usize,
    pub learning_rate: f64,
    pub dropout: f64,
    pub hidden: usize,
    pub optimizer: String,
}

impl Default for ReferenceBenchmarks {
    fn default() -> Self {
        let row = |label: &str, mse: f64, window: usize, lr: f64, dropout: f64, hidden: usize, opt: &str| {
            ReferenceModel {
                label: label.to_string(),
                mse,
                window,
                learning_rate: lr,
                dropout,
                hidden,
                optimizer: opt.to_string(),
            }
        };
        ReferenceBenchmarks {
            ensemble_mse: 0.000127,
            models: vec![
                row("SENT-Bi-GRU", 0.000137, 5, 0.0031, 0.3992, 2, "AdamW"),
                row("SENT-Bi-LSTM", 0.000194, 17, 0.0032, 0.3205, 12, "Adam"),
                row("SENT-CNN-Bi-LSTM", 0.000280, 5, 0.01, 0.3439, 8, "Adagrad"),
                row("SENT-CNN-Bi-LSTM-Att", 0.000300, 6, 0.0045, 0.4399, 8, "Adam"),
                row("SENT-USD-CNN-Bi-LSTM-Att", 0.000349, 10, 0.0043, 0.3140, 4, "RMSprop"),
                row("SENT-encoder-decoder-Bi-LSTM", 0.000358, 10, 0.0060, 0.2573, 64, "Adam"),
                row("SENT-USD-encoder-decoder-LSTM", 0.000344, 17, 0.0080, 0.2747, 64, "AdamW"),
            ],
        }
    }
}

fn default_models() -> Vec<String> {
    ArchitectureId::ALL.iter().map(|a| a.name().to_string()).collect()
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: DataPaths,
    pub out: PathBuf,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub gwo: GwoSettings,
    #[serde(default)]
    pub train: TrainSettings,
    /// Budget for the final per-model training; falls back to `train`.
    #[serde(default)]
    pub final_train: Option<TrainSettings>,
    #[serde(default = "default_models")]
    pub models: Vec<String>,
    /// Labels blended by the ensemble; `null` means every trained model.
    #[serde(default)]
    pub ensemble_members: Option<Vec<String>>,
    #[serde(default)]
    pub mspe_formula: MspeFormula,
    /// Optional benchmark values echoed into evaluation reports; defaults
    /// to the bundled reference table.
    #[serde(default = "default_reference")]
    pub reference: Option<ReferenceBenchmarks>,
}

fn default_reference() -> Option<ReferenceBenchmarks> {
    Some(ReferenceBenchmarks::default())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::InvalidArgument(format!("cannot read config {path:?}: {e}"))
        })?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::InvalidArgument(format!("bad config {path:?}: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(CliError::InvalidArgument("config lists no models".into()));
        }
        self.architectures()?;
        if self.gwo.pop_size < 4 || self.gwo.iterations == 0 || self.gwo.runs == 0 {
            return Err(CliError::InvalidArgument(
                "gwo settings need pop_size >= 4, iterations >= 1, runs >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn architectures(&self) -> Result<Vec<ArchitectureId>> {
        self.models
            .iter()
            .map(|m| ArchitectureId::parse(m).map_err(CliError::from))
            .collect()
    }

    /// Stable fingerprint of the resolved configuration; stamped into every
    /// artifact so stages can detect stale upstream outputs.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        sha256_str(&canonical)
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            batch_size: self.train.batch_size,
            max_epochs: self.train.max_epochs,
            patience: self.train.patience,
            seed,
            validation_fraction: self.split.validation_fraction,
        }
    }

    pub fn final_train_config(&self, seed: u64) -> TrainConfig {
        let settings = self.final_train.unwrap_or(self.train);
        TrainConfig {
            batch_size: settings.batch_size,
            max_epochs: settings.max_epochs,
            patience: settings.patience,
            seed,
            validation_fraction: self.split.validation_fraction,
        }
    }
}
