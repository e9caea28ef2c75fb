//! Sliding-window supervised datasets and chronological splitting.

use serde::{Deserialize, Serialize};

use super::align::{AlignedFrame, Column};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Joint forecast horizon: all three days ahead are predicted per sample.
pub const HORIZON: usize = 3;

/// Exogenous feature selection, decoded from a four-way categorical
/// dimension in the order None, USDX, SENT, both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureSet {
    None,
    Usdx,
    Sent,
    Both,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 4] = [
        FeatureSet::None,
        FeatureSet::Usdx,
        FeatureSet::Sent,
        FeatureSet::Both,
    ];

    pub fn from_index(index: usize) -> Result<Self> {
        Self::ALL
            .get(index)
            .copied()
            .ok_or_else(|| Error::invalid_argument(format!("feature-set index {index} out of range")))
    }

    /// Extra columns stacked after the target column.
    pub fn extras(&self) -> &'static [Column] {
        match self {
            FeatureSet::None => &[],
            FeatureSet::Usdx => &[Column::Usdx],
            FeatureSet::Sent => &[Column::Sent],
            FeatureSet::Both => &[Column::Usdx, Column::Sent],
        }
    }

    pub fn feature_count(&self) -> usize {
        1 + self.extras().len()
    }

    /// Model-label prefix, e.g. `SENT-` or `SENT-USD-`.
    pub fn label_prefix(&self) -> &'static str {
        match self {
            FeatureSet::None => "",
            FeatureSet::Usdx => "USD-",
            FeatureSet::Sent => "SENT-",
            FeatureSet::Both => "SENT-USD-",
        }
    }
}

/// Supervised tensors: `x` is (N, window, features), `y` is (N, HORIZON) in
/// normalized target units. Sample `i` reads frame rows `[i, i+window)` and
/// predicts target rows `[i+window, i+window+HORIZON)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    pub x: Tensor,
    pub y: Tensor,
    pub window: usize,
    pub horizon: usize,
    pub features: FeatureSet,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.x.shape()[0]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_count(&self) -> usize {
        self.features.feature_count()
    }

    pub fn slice(&self, start: usize, end: usize) -> Result<WindowedDataset> {
        Ok(WindowedDataset {
            x: self.x.slice_rows(start, end)?,
            y: self.y.slice_rows(start, end)?,
            window: self.window,
            horizon: self.horizon,
            features: self.features,
        })
    }
}

/// Build sliding windows over a (normalized) frame.
/// N = len - window - horizon + 1.
pub fn make_windows(
    frame: &AlignedFrame,
    features: FeatureSet,
    window: usize,
    horizon: usize,
) -> Result<WindowedDataset> {
    if window == 0 || horizon == 0 {
        return Err(Error::invalid_argument("window and horizon must be positive"));
    }
    let needed = window + horizon;
    if frame.len() < needed {
        return Err(Error::invalid_argument(format!(
            "frame has {} rows; needs at least {needed} for window {window} + horizon {horizon}",
            frame.len()
        )));
    }
    let n = frame.len() - window - horizon + 1;
    let extras = features.extras();
    let f = 1 + extras.len();

    let mut x = Tensor::zeros(&[n, window, f]);
    let mut y = Tensor::zeros(&[n, horizon]);
    for i in 0..n {
        for t in 0..window {
            x.set3(i, t, 0, frame.brent[i + t]);
            for (j, col) in extras.iter().enumerate() {
                x.set3(i, t, 1 + j, frame.column(*col)[i + t]);
            }
        }
        for h in 0..horizon {
            y.data_mut()[i * horizon + h] = frame.brent[i + window + h];
        }
    }
    Ok(WindowedDataset {
        x,
        y,
        window,
        horizon,
        features,
    })
}

/// Order-preserving train/test split over samples. The first
/// `ceil(N * (1 - test_fraction))` samples go to train, and the final
/// `horizon - 1` of those are dropped so that no train target row reaches
/// into the test block's target rows.
pub fn chronological_split(
    dataset: &WindowedDataset,
    test_fraction: f64,
) -> Result<(WindowedDataset, WindowedDataset)> {
    if !(test_fraction > 0.0 && test_fraction < 0.5) {
        return Err(Error::invalid_argument(format!(
            "test_fraction must lie in (0, 0.5), got {test_fraction}"
        )));
    }
    let n = dataset.len();
    let train_raw = ((n as f64) * (1.0 - test_fraction)).ceil() as usize;
    let trim = dataset.horizon - 1;
    if train_raw <= trim {
        return Err(Error::invalid_argument(format!(
            "split leaves no training samples after trimming {trim} boundary samples"
        )));
    }
    if train_raw >= n {
        return Err(Error::invalid_argument("split leaves no test samples"));
    }
    let train = dataset.slice(0, train_raw - trim)?;
    let test = dataset.slice(train_raw, n)?;
    Ok((train, test))
}

/// Frame-row-anchored split boundaries shared by every model in a run.
///
/// Blocks own contiguous target rows: train targets lie in
/// `[0, val_target_start)`, validation targets in
/// `[val_target_start, test_target_start)`, test targets in
/// `[test_target_start, frame_len)`. A sample belongs to a block only if its
/// whole target window fits inside, so boundary samples are dropped and no
/// target row is shared between blocks. Validation and test sample counts
/// are then identical for every window size, which keeps forecast matrices
/// from differently-windowed models aligned row-for-row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowSplit {
    pub frame_len: usize,
    pub horizon: usize,
    pub val_target_start: usize,
    pub test_target_start: usize,
}

impl RowSplit {
    pub fn from_fractions(
        frame_len: usize,
        horizon: usize,
        test_fraction: f64,
        validation_fraction: f64,
    ) -> Result<Self> {
        if !(test_fraction > 0.0 && test_fraction < 0.5) {
            return Err(Error::invalid_argument(format!(
                "test_fraction must lie in (0, 0.5), got {test_fraction}"
            )));
        }
        if !(validation_fraction > 0.0 && validation_fraction < 0.5) {
            return Err(Error::invalid_argument(format!(
                "validation_fraction must lie in (0, 0.5), got {validation_fraction}"
            )));
        }
        let test_rows = ((frame_len as f64 * test_fraction).floor() as usize).max(horizon);
        if test_rows >= frame_len {
            return Err(Error::invalid_argument("test block covers the whole frame"));
        }
        let test_target_start = frame_len - test_rows;
        let val_rows = ((test_target_start as f64 * validation_fraction).floor() as usize).max(horizon);
        if val_rows >= test_target_start {
            return Err(Error::invalid_argument("validation block leaves no training rows"));
        }
        let val_target_start = test_target_start - val_rows;
        Ok(RowSplit {
            frame_len,
            horizon,
            val_target_start,
            test_target_start,
        })
    }

    /// Rows available for fitting scalers: everything before the first
    /// validation target.
    pub fn train_rows(&self) -> usize {
        self.val_target_start
    }

    pub fn validation_samples(&self) -> usize {
        self.test_target_start - self.val_target_start - self.horizon + 1
    }

    pub fn test_samples(&self) -> usize {
        self.frame_len - self.test_target_start - self.horizon + 1
    }

    /// First-target rows of the test samples, for date-indexed reports.
    pub fn test_target_rows(&self) -> std::ops::Range<usize> {
        self.test_target_start..self.frame_len - self.horizon + 1
    }

    /// Cut a windowed dataset (built over the full frame) into the three
    /// blocks. Sample `i` has first-target row `i + window`.
    pub fn slices(&self, dataset: &WindowedDataset) -> Result<SplitSlices> {
        let w = dataset.window;
        let h = dataset.horizon;
        if h != self.horizon {
            return Err(Error::invalid_argument(format!(
                "dataset horizon {h} differs from split horizon {}",
                self.horizon
            )));
        }
        if self.val_target_start < w + h {
            return Err(Error::invalid_argument(format!(
                "window {w} leaves no training samples before validation row {}",
                self.val_target_start
            )));
        }
        // sample index ranges, half-open over i = first_target_row - w
        let train_end = self.val_target_start - h + 1 - w;
        let val_start = self.val_target_start - w;
        let val_end = self.test_target_start - h + 1 - w;
        let test_start = self.test_target_start - w;
        let test_end = self.frame_len - h + 1 - w;
        Ok(SplitSlices {
            train: dataset.slice(0, train_end)?,
            validation: dataset.slice(val_start, val_end)?,
            test: dataset.slice(test_start, test_end)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SplitSlices {
    pub train: WindowedDataset,
    pub validation: WindowedDataset,
    pub test: WindowedDataset,
}
