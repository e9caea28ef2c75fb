//! Min-max scaling fitted on training rows only.

use serde::{Deserialize, Serialize};

use super::align::{AlignedFrame, Column};
use crate::error::{Error, Result};

/// Per-column `(min, max)` over the training rows. `apply` maps
/// `v -> (v - min) / (max - min)`; rows past the fit range may map outside
/// `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub columns: Vec<ColumnStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub column: Column,
    pub min: f64,
    pub max: f64,
}

impl Normalizer {
    pub fn stats(&self, column: Column) -> &ColumnStats {
        self.columns
            .iter()
            .find(|s| s.column == column)
            .expect("all three columns are fitted")
    }

    pub fn apply_value(&self, column: Column, v: f64) -> f64 {
        let s = self.stats(column);
        (v - s.min) / (s.max - s.min)
    }

    pub fn invert_value(&self, column: Column, v: f64) -> f64 {
        let s = self.stats(column);
        s.min + v * (s.max - s.min)
    }

    pub fn apply(&self, frame: &AlignedFrame) -> AlignedFrame {
        let map = |c: Column, values: &[f64]| -> Vec<f64> {
            values.iter().map(|&v| self.apply_value(c, v)).collect()
        };
        AlignedFrame {
            dates: frame.dates.clone(),
            brent: map(Column::Brent, &frame.brent),
            usdx: map(Column::Usdx, &frame.usdx),
            sent: map(Column::Sent, &frame.sent),
        }
    }
}

/// Fit on the first `train_row_count` rows of the frame.
pub fn fit_normalizer(frame: &AlignedFrame, train_row_count: usize) -> Result<Normalizer> {
    if train_row_count < 2 {
        return Err(Error::invalid_argument(format!(
            "normalizer needs at least 2 training rows, got {train_row_count}"
        )));
    }
    if train_row_count > frame.len() {
        return Err(Error::invalid_argument(format!(
            "train_row_count {train_row_count} exceeds frame length {}",
            frame.len()
        )));
    }
    let mut columns = Vec::with_capacity(3);
    for c in Column::ALL {
        let values = &frame.column(c)[..train_row_count];
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max <= min {
            return Err(Error::invalid_argument(format!(
                "column {} is constant over the training rows",
                c.name()
            )));
        }
        columns.push(ColumnStats { column: c, min, max });
    }
    Ok(Normalizer { columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn frame(brent: Vec<f64>) -> AlignedFrame {
        let n = brent.len();
        AlignedFrame {
            dates: (0..n)
                .map(|i| NaiveDate::from_num_days_from_ce_opt(737800 + i as i32).unwrap())
                .collect(),
            usdx: (0..n).map(|i| 90.0 + i as f64).collect(),
            sent: (0..n).map(|i| -0.5 + 0.1 * i as f64).collect(),
            brent,
        }
    }

    #[test]
    fn endpoints_map_to_zero_and_one() {
        let f = frame(vec![10.0, 20.0, 30.0]);
        let norm = fit_normalizer(&f, 3).unwrap();
        let applied = norm.apply(&f);
        assert_eq!(applied.brent, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn round_trip_is_identity_within_tolerance() {
        let f = frame(vec![12.5, 47.0, 33.3, 99.9, 60.1]);
        let norm = fit_normalizer(&f, 4).unwrap();
        for &v in &f.brent {
            let round = norm.invert_value(Column::Brent, norm.apply_value(Column::Brent, v));
            assert!((round - v).abs() < 1e-9);
        }
    }

    #[test]
    fn test_rows_may_map_outside_unit_interval() {
        let f = frame(vec![10.0, 20.0, 30.0, 35.0]);
        let norm = fit_normalizer(&f, 3).unwrap();
        let v = norm.apply_value(Column::Brent, 35.0);
        assert!((v - 1.25).abs() < 1e-12);
    }

    #[test]
    fn constant_training_column_is_an_error() {
        let f = frame(vec![5.0, 5.0, 5.0, 6.0]);
        assert!(fit_normalizer(&f, 3).is_err());
    }

    #[test]
    fn needs_at_least_two_rows() {
        let f = frame(vec![1.0, 2.0]);
        assert!(fit_normalizer(&f, 1).is_err());
        assert!(fit_normalizer(&f, 3).is_err());
    }
}
