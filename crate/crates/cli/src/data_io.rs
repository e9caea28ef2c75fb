//! Shared dataset preparation and forecast-table encoding.

use std::path::Path;

use wolfcast_core::data::{
    align, fit_normalizer, load_csv, make_windows, sha256_file, AlignedFrame, DatasetManifest,
    FeatureSet, Normalizer, RowSplit, SplitSlices, HORIZON,
};
use wolfcast_core::forecasters::ForecastMatrix;
use wolfcast_core::tensor::Tensor;

use crate::artifacts::{require_fresh, OutLayout};
use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// A fully prepared dataset: normalized frame plus the shared row split.
pub struct Prepared {
    pub frame: AlignedFrame,
    pub split: RowSplit,
    pub normalizer: Normalizer,
    pub manifest: DatasetManifest,
}

/// Load, align, fit the scaler on pre-validation rows, and normalize.
pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    let brent = load_csv(&config.data.brent, "date", "value")?;
    let usdx = load_csv(&config.data.usdx, "date", "value")?;
    let sent = load_csv(&config.data.sent, "date", "value")?;
    let raw_frame = align(&brent, &usdx, &sent)?;
    let split = RowSplit::from_fractions(
        raw_frame.len(),
        HORIZON,
        config.split.test_fraction,
        config.split.validation_fraction,
    )?;
    let normalizer = fit_normalizer(&raw_frame, split.train_rows())?;
    let frame = normalizer.apply(&raw_frame);

    let manifest = DatasetManifest {
        brent_path: config.data.brent.display().to_string(),
        usdx_path: config.data.usdx.display().to_string(),
        sent_path: config.data.sent.display().to_string(),
        brent_sha256: sha256_file(&config.data.brent)?,
        usdx_sha256: sha256_file(&config.data.usdx)?,
        sent_sha256: sha256_file(&config.data.sent)?,
        rows: frame.len(),
        split,
        normalizer: normalizer.clone(),
    };
    Ok(Prepared {
        frame,
        split,
        normalizer,
        manifest,
    })
}

/// Rebuild the prepared dataset from the ingest manifest, verifying that
/// the input files still hash to what was ingested.
pub fn load_prepared(config: &RunConfig, layout: &OutLayout, config_hash: &str) -> Result<Prepared> {
    let artifact = require_fresh::<DatasetManifest>(&layout.manifest(), config_hash, "ingest")?;
    let manifest = artifact.data;
    for (path, recorded) in [
        (&config.data.brent, &manifest.brent_sha256),
        (&config.data.usdx, &manifest.usdx_sha256),
        (&config.data.sent, &manifest.sent_sha256),
    ] {
        let current = sha256_file(path)?;
        if current != *recorded {
            return Err(CliError::StaleArtifact {
                path: path.display().to_string(),
                found: current,
                expected: recorded.clone(),
            });
        }
    }
    let prepared = prepare(config)?;
    Ok(Prepared {
        manifest,
        ..prepared
    })
}

/// Windowed dataset + split slices for one model configuration.
pub fn sliced_dataset(
    frame: &AlignedFrame,
    split: &RowSplit,
    features: FeatureSet,
    window: usize,
) -> Result<SplitSlices> {
    let dataset = make_windows(frame, features, window, HORIZON)?;
    Ok(split.slices(&dataset)?)
}

fn block_targets(frame: &AlignedFrame, start: usize, samples: usize) -> Tensor {
    let mut y = Tensor::zeros(&[samples, HORIZON]);
    for i in 0..samples {
        for h in 0..HORIZON {
            y.data_mut()[i * HORIZON + h] = frame.brent[start + i + h];
        }
    }
    y
}

/// Actual target matrix for the validation block; identical rows for every
/// model regardless of window size.
pub fn validation_targets(frame: &AlignedFrame, split: &RowSplit) -> Tensor {
    block_targets(frame, split.val_target_start, split.validation_samples())
}

pub fn test_targets(frame: &AlignedFrame, split: &RowSplit) -> Tensor {
    block_targets(frame, split.test_target_start, split.test_samples())
}

/// Forecast matrices persist as `sample,step,date,value` tables; float text
/// uses the shortest round-trip representation so reloads are bit-exact.
pub fn forecast_to_csv(matrix: &Tensor, frame: &AlignedFrame, target_start: usize) -> String {
    let mut out = String::from("sample,step,date,value\n");
    let n = matrix.shape()[0];
    for i in 0..n {
        for h in 0..HORIZON {
            let date = frame.dates[target_start + i + h];
            let v = matrix.at2(i, h);
            out.push_str(&format!("{i},{},{date},{v}\n", h + 1));
        }
    }
    out
}

/// Rebuild a forecast matrix from the non-comment lines of a forecast CSV.
pub fn forecast_from_csv(lines: &[String], label: &str) -> Result<ForecastMatrix> {
    let mut rows: Vec<(usize, usize, f64)> = Vec::new();
    for line in lines {
        if line.starts_with("sample,") || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(CliError::InvalidArgument(format!(
                "malformed forecast row '{line}'"
            )));
        }
        let sample: usize = fields[0]
            .parse()
            .map_err(|e| CliError::InvalidArgument(format!("bad sample index: {e}")))?;
        let step: usize = fields[1]
            .parse()
            .map_err(|e| CliError::InvalidArgument(format!("bad step: {e}")))?;
        let value: f64 = fields[3]
            .parse()
            .map_err(|e| CliError::InvalidArgument(format!("bad value: {e}")))?;
        rows.push((sample, step, value));
    }
    let n = rows.iter().map(|(s, _, _)| s + 1).max().unwrap_or(0);
    let mut values = Tensor::zeros(&[n, HORIZON]);
    for (sample, step, value) in rows {
        if step == 0 || step > HORIZON || sample >= n {
            return Err(CliError::InvalidArgument(format!(
                "forecast row out of range: sample {sample}, step {step}"
            )));
        }
        values.data_mut()[sample * HORIZON + step - 1] = value;
    }
    Ok(ForecastMatrix {
        values,
        model_label: label.to_string(),
    })
}

/// Map a forecast matrix back into raw target units.
pub fn denormalize_matrix(matrix: &Tensor, normalizer: &Normalizer) -> Tensor {
    let mut out = matrix.clone();
    for v in out.data_mut() {
        *v = normalizer.invert_value(wolfcast_core::data::Column::Brent, *v);
    }
    out
}

pub fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}
