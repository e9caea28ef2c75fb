//! Swarm-calibrated ensemble forecasting toolkit.
//!
//! A grey wolf optimizer tunes feature selection, sliding-window size, and
//! network hyperparameters for five recurrent architectures, then optimizes
//! simplex weights that blend their multi-step forecasts into a single
//! ensemble prediction, scored with six standard metrics.

pub mod calibration;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod forecasters;
pub mod gwo;
pub mod metrics;
pub mod nn;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
