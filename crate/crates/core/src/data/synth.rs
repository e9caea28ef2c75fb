//! Bundled synthetic dataset generator.
//!
//! Produces three weekday series shaped like the real inputs: a target price
//! built from two sines over a drifting level, a negatively correlated
//! exogenous index, and a bounded momentum-style sentiment score derived
//! from past target moves only. A few exogenous dates are withheld so the
//! alignment forward-fill path is exercised end to end.

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use super::series::RawSeries;
use crate::error::Result;
use crate::rng::{self, tags};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub days: usize,
    pub seed: u64,
    /// Additive uniform noise half-width on the target series.
    pub noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            days: 420,
            seed: 7,
            noise: 0.6,
        }
    }
}

pub struct SynthData {
    pub brent: RawSeries,
    pub usdx: RawSeries,
    pub sent: RawSeries,
}

pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    let mut rng = rng::stream(config.seed, tags::SYNTH, 0);
    let start = NaiveDate::from_ymd_opt(2012, 1, 3).expect("valid calendar date");

    let mut dates = Vec::with_capacity(config.days);
    let mut date = start;
    while dates.len() < config.days {
        if !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            dates.push(date);
        }
        date = date.succ_opt().expect("date range stays in bounds");
    }

    // Periods stay well inside a few months of data so every phase of the
    // seasonal structure appears in any training block.
    let tau = std::f64::consts::TAU;
    let mut level = 70.0;
    let mut brent_vals = Vec::with_capacity(config.days);
    for t in 0..config.days {
        level += rng::uniform(&mut rng, -0.12, 0.12);
        let seasonal = 11.0 * (tau * t as f64 / 43.0).sin() + 5.0 * (tau * t as f64 / 11.0).sin();
        let noise = rng::uniform(&mut rng, -config.noise, config.noise);
        brent_vals.push(level + seasonal + noise);
    }

    let mut usdx_vals = Vec::with_capacity(config.days);
    for t in 0..config.days {
        let coupled = 95.0 - 0.35 * (brent_vals[t] - 70.0);
        let seasonal = 2.5 * (tau * t as f64 / 97.0 + 1.1).sin();
        usdx_vals.push(coupled + seasonal + rng::uniform(&mut rng, -0.4, 0.4));
    }

    let mut sent_vals = Vec::with_capacity(config.days);
    for t in 0..config.days {
        let momentum = if t >= 5 {
            (brent_vals[t] - brent_vals[t - 5]) / 5.0
        } else {
            0.0
        };
        sent_vals.push(momentum.tanh() + rng::uniform(&mut rng, -0.08, 0.08));
    }

    // Withhold some exogenous observations (different phases per series).
    let keep = |t: usize, gap: usize, phase: usize| (t + phase) % gap != 0 || t == 0;
    let brent = RawSeries::new(
        "brent",
        dates.iter().cloned().zip(brent_vals).collect::<Vec<_>>(),
    )?;
    let usdx = RawSeries::new(
        "usdx",
        dates
            .iter()
            .cloned()
            .zip(usdx_vals)
            .enumerate()
            .filter(|(t, _)| keep(*t, 41, 7))
            .map(|(_, row)| row)
            .collect::<Vec<_>>(),
    )?;
    let sent = RawSeries::new(
        "sent",
        dates
            .iter()
            .cloned()
            .zip(sent_vals)
            .enumerate()
            .filter(|(t, _)| keep(*t, 53, 19))
            .map(|(_, row)| row)
            .collect::<Vec<_>>(),
    )?;
    Ok(SynthData { brent, usdx, sent })
}
