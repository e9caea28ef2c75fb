//! Forecast accuracy metrics.
//!
//! Six scalar measures over paired actual/predicted vectors. Multi-step
//! (N x horizon) matrices are flattened row-major before scoring, so one
//! scalar summarizes all horizon steps. Percentage-based metrics skip
//! entries whose actual value is closer to zero than 1e-12 and report how
//! many were skipped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Threshold below which an actual value is excluded from percentage
/// metrics.
pub const NEAR_ZERO: f64 = 1e-12;

/// Which squared-percentage definition `mspe` uses. `Percentage` is the
/// default: mean of ((y - yhat) / y)^2. `PlainSquared` duplicates plain MSE
/// and exists for comparability with reports that define MSPE that way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum MspeMode {
    #[default]
    Percentage,
    PlainSquared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    pub mspe: f64,
    pub mape: f64,
    pub r2: f64,
    /// Entries excluded from mape / percentage-mspe for near-zero actuals.
    pub mape_excluded: usize,
    pub mspe_excluded: usize,
}

fn check_pair(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::invalid_argument(format!(
            "length mismatch: actual {} vs predicted {}",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::invalid_argument("metrics on empty input"));
    }
    if actual.iter().chain(predicted).any(|v| !v.is_finite()) {
        return Err(Error::invalid_argument("metrics require finite entries"));
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let n = actual.len() as f64;
    Ok(actual.iter().zip(predicted).map(|(y, p)| (y - p).abs()).sum::<f64>() / n)
}

/// Mean squared error.
pub fn mse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let n = actual.len() as f64;
    Ok(actual.iter().zip(predicted).map(|(y, p)| (y - p) * (y - p)).sum::<f64>() / n)
}

/// Root mean squared error.
pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    Ok(mse(actual, predicted)?.sqrt())
}

/// Mean squared percentage error; see [`MspeMode`]. Returns the value and
/// the number of excluded near-zero entries.
pub fn mspe(actual: &[f64], predicted: &[f64], mode: MspeMode) -> Result<(f64, usize)> {
    check_pair(actual, predicted)?;
    match mode {
        MspeMode::PlainSquared => Ok((mse(actual, predicted)?, 0)),
        MspeMode::Percentage => {
            let mut sum = 0.0;
            let mut kept = 0usize;
            for (y, p) in actual.iter().zip(predicted) {
                if y.abs() < NEAR_ZERO {
                    continue;
                }
                let r = (y - p) / y;
                sum += r * r;
                kept += 1;
            }
            if kept == 0 {
                return Err(Error::invalid_argument(
                    "all actual values are near zero; percentage error undefined",
                ));
            }
            Ok((sum / kept as f64, actual.len() - kept))
        }
    }
}

/// Mean absolute percentage error: mean of |y - yhat| / |y| over entries
/// with |y| >= 1e-12. Returns the value and the excluded count.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<(f64, usize)> {
    check_pair(actual, predicted)?;
    let mut sum = 0.0;
    let mut kept = 0usize;
    for (y, p) in actual.iter().zip(predicted) {
        if y.abs() < NEAR_ZERO {
            continue;
        }
        sum += (y - p).abs() / y.abs();
        kept += 1;
    }
    if kept == 0 {
        return Err(Error::invalid_argument(
            "all actual values are near zero; percentage error undefined",
        ));
    }
    Ok((sum / kept as f64, actual.len() - kept))
}

/// Coefficient of determination: 1 - SS_res / SS_tot.
pub fn r2(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let n = actual.len() as f64;
    let mean = actual.iter().sum::<f64>() / n;
    let ss_tot: f64 = actual.iter().map(|y| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::UndefinedVariance);
    }
    let ss_res: f64 = actual.iter().zip(predicted).map(|(y, p)| (y - p) * (y - p)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// All six metrics over flat slices.
pub fn report(actual: &[f64], predicted: &[f64], mode: MspeMode) -> Result<MetricReport> {
    let (mspe_value, mspe_excluded) = mspe(actual, predicted, mode)?;
    let (mape_value, mape_excluded) = mape(actual, predicted)?;
    Ok(MetricReport {
        mae: mae(actual, predicted)?,
        mse: mse(actual, predicted)?,
        rmse: rmse(actual, predicted)?,
        mspe: mspe_value,
        mape: mape_value,
        r2: r2(actual, predicted)?,
        mape_excluded,
        mspe_excluded,
    })
}

/// Metrics over multi-step matrices, flattened row-major.
pub fn report_matrix(actual: &Tensor, predicted: &Tensor, mode: MspeMode) -> Result<MetricReport> {
    if actual.shape() != predicted.shape() {
        return Err(Error::ShapeMismatch {
            expected: actual.shape().to_vec(),
            actual: predicted.shape().to_vec(),
        });
    }
    report(actual.data(), predicted.data(), mode)
}
