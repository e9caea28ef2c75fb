//! Stage 2: blending individual forecasts with simplex weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecasters::ForecastMatrix;
use crate::gwo::{gwo_optimize, DimensionSpec, GwoConfig, Position, SearchSpace};
use crate::metrics::mse;
use crate::tensor::Tensor;

pub const ENSEMBLE_LABEL: &str = "GWO-Ensemble";

/// Blend weights on the probability simplex: every component in [0, 1],
/// summing to one within 1e-9.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::invalid_argument("weight vector must be non-empty"));
        }
        if w.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid_argument(format!("weights outside [0, 1]: {w:?}")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid_argument(format!("weights sum to {sum}, not 1")));
        }
        Ok(WeightVector { w })
    }

    pub fn components(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Project raw non-negative scores onto the simplex by dividing by their
/// sum.
pub fn normalize_weights(raw: &[f64]) -> Result<WeightVector> {
    if raw.is_empty() {
        return Err(Error::invalid_argument("empty raw weights"));
    }
    if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid_argument(format!(
            "raw weights must be finite and non-negative: {raw:?}"
        )));
    }
    let sum: f64 = raw.iter().sum();
    if sum <= 0.0 {
        return Err(Error::invalid_argument("raw weights are all zero"));
    }
    WeightVector::new(raw.iter().map(|v| v / sum).collect())
}

/// Weighted sum of forecast matrices: `out[i][j] = sum_k w_k * f_k[i][j]`.
pub fn blend(forecasts: &[ForecastMatrix], weights: &WeightVector) -> Result<ForecastMatrix> {
    if forecasts.is_empty() {
        return Err(Error::invalid_argument("no forecasts to blend"));
    }
    if forecasts.len() != weights.len() {
        return Err(Error::invalid_argument(format!(
            "{} forecasts but {} weights",
            forecasts.len(),
            weights.len()
        )));
    }
    let shape = forecasts[0].values.shape().to_vec();
    for f in forecasts {
        if f.values.shape() != shape.as_slice() {
            return Err(Error::ShapeMismatch {
                expected: shape.clone(),
                actual: f.values.shape().to_vec(),
            });
        }
    }
    let mut out = Tensor::zeros(&shape);
    for (f, &w) in forecasts.iter().zip(weights.components()) {
        for (o, v) in out.data_mut().iter_mut().zip(f.values.data()) {
            *o += w * v;
        }
    }
    Ok(ForecastMatrix {
        values: out,
        model_label: ENSEMBLE_LABEL.to_string(),
    })
}

/// Search blend weights minimizing MSE against `targets` on the fitting
/// slice. Raw weights live in `[0, 1]^K` and are normalized by their sum;
/// the initial population is seeded with every one-hot vector plus the
/// uniform vector, so the blended fitting-slice MSE can never exceed the
/// best individual member's.
pub fn optimize_weights(
    forecasts: &[ForecastMatrix],
    targets: &Tensor,
    pop_size: usize,
    iterations: usize,
    seed: u64,
) -> Result<(WeightVector, f64)> {
    let k = forecasts.len();
    if k < 2 {
        return Err(Error::invalid_argument(format!(
            "weight optimization needs at least 2 members, got {k}"
        )));
    }
    for f in forecasts {
        if f.values.shape() != targets.shape() {
            return Err(Error::ShapeMismatch {
                expected: targets.shape().to_vec(),
                actual: f.values.shape().to_vec(),
            });
        }
    }

    let space = SearchSpace::new(vec![DimensionSpec::continuous(0.0, 1.0); k])?;
    let mut config = GwoConfig::new(pop_size, iterations, seed);
    for unit in 0..k {
        let mut coords = vec![0.0; k];
        coords[unit] = 1.0;
        config.seeded_candidates.push(Position::new(coords));
    }
    config.seeded_candidates.push(Position::new(vec![1.0; k]));

    let objective = |decoded: &crate::gwo::DecodedSolution| -> f64 {
        let raw: Vec<f64> = decoded.iter().map(|v| v.as_real().unwrap_or(0.0)).collect();
        let Ok(weights) = normalize_weights(&raw) else {
            return f64::INFINITY;
        };
        match blend(forecasts, &weights) {
            Ok(blended) => mse(targets.data(), blended.values.data()).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    };

    let outcome = gwo_optimize(objective, &space, &config)?;
    let raw: Vec<f64> = outcome
        .solution
        .iter()
        .map(|v| v.as_real())
        .collect::<Result<_>>()?;
    Ok((normalize_weights(&raw)?, outcome.fitness))
}
