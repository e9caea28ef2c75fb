//! Stage artifacts on disk: JSON envelopes stamped with the master seed and
//! config hash, stamped CSV tables, the output-directory layout, and the
//! per-directory lock.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Every JSON artifact carries the run identity so downstream stages can
/// reject stale inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub master_seed: u64,
    pub config_hash: String,
    pub data: T,
}

pub fn write_artifact<T: Serialize>(
    path: &Path,
    master_seed: u64,
    config_hash: &str,
    data: &T,
) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let artifact = Artifact {
        master_seed,
        config_hash: config_hash.to_string(),
        data,
    };
    let json = serde_json::to_string_pretty(&artifact)?;
    fs::write(path, json)?;
    Ok(())
}

pub fn read_artifact<T: DeserializeOwned>(path: &Path) -> Result<Artifact<T>> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Read an artifact that an earlier stage must have produced; a missing
/// file names the stage to run, a config-hash mismatch is a stale-artifact
/// error.
pub fn require_fresh<T: DeserializeOwned>(
    path: &Path,
    expected_hash: &str,
    stage: &str,
) -> Result<Artifact<T>> {
    if !path.exists() {
        return Err(CliError::missing_stage(
            stage,
            format!("{path:?} not found; run `wolfcast {stage}` first"),
        ));
    }
    let artifact: Artifact<T> = read_artifact(path)?;
    if artifact.config_hash != expected_hash {
        return Err(CliError::StaleArtifact {
            path: format!("{path:?}"),
            found: artifact.config_hash,
            expected: expected_hash.to_string(),
        });
    }
    Ok(artifact)
}

/// True when the artifact exists and matches the current config hash, i.e.
/// the stage output is already up to date.
pub fn is_fresh(path: &Path, expected_hash: &str) -> bool {
    if !path.exists() {
        return false;
    }
    match read_artifact::<serde_json::Value>(path) {
        Ok(a) => a.config_hash == expected_hash,
        Err(_) => false,
    }
}

/// Stamp line written at the top of every CSV table.
pub fn csv_stamp(master_seed: u64, config_hash: &str) -> String {
    format!("# master_seed={master_seed} config_hash={config_hash}\n")
}

pub fn write_stamped_csv(path: &Path, master_seed: u64, config_hash: &str, body: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = csv_stamp(master_seed, config_hash);
    text.push_str(body);
    fs::write(path, text)?;
    Ok(())
}

/// Read a stamped CSV, verifying its config hash; returns the non-comment
/// lines.
pub fn read_stamped_csv(path: &Path, expected_hash: &str, stage: &str) -> Result<Vec<String>> {
    if !path.exists() {
        return Err(CliError::missing_stage(
            stage,
            format!("{path:?} not found; run `wolfcast {stage}` first"),
        ));
    }
    let text = fs::read_to_string(path)?;
    let mut lines = Vec::new();
    for line in text.lines() {
        if let Some(stamp) = line.strip_prefix('#') {
            if let Some(hash) = stamp.split("config_hash=").nth(1) {
                let hash = hash.split_whitespace().next().unwrap_or("");
                if hash != expected_hash {
                    return Err(CliError::StaleArtifact {
                        path: format!("{path:?}"),
                        found: hash.to_string(),
                        expected: expected_hash.to_string(),
                    });
                }
            }
            continue;
        }
        lines.push(line.to_string());
    }
    Ok(lines)
}

/// Output-directory layout shared by all stages.
pub struct OutLayout {
    root: PathBuf,
}

impl OutLayout {
    pub fn new(root: &Path) -> Self {
        OutLayout {
            root: root.to_path_buf(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn calibration_dir(&self) -> PathBuf {
        self.root.join("calibration")
    }

    pub fn calibration_file(&self, label: &str) -> PathBuf {
        self.calibration_dir().join(format!("{label}.json"))
    }

    pub fn trace_file(&self, label: &str, run: usize) -> PathBuf {
        self.root.join("traces").join(format!("{label}_run{run}.csv"))
    }

    pub fn trace_meta_file(&self, label: &str, run: usize) -> PathBuf {
        self.root
            .join("traces")
            .join(format!("{label}_run{run}.meta.json"))
    }

    pub fn model_file(&self, label: &str) -> PathBuf {
        self.root.join("models").join(format!("{label}.json"))
    }

    pub fn forecast_file(&self, label: &str, slice: &str) -> PathBuf {
        self.root
            .join("forecasts")
            .join(format!("{label}_{slice}.csv"))
    }

    pub fn weights_file(&self) -> PathBuf {
        self.root.join("ensemble").join("weights.json")
    }

    pub fn ensemble_forecast(&self) -> PathBuf {
        self.root.join("ensemble").join("ensemble_test.csv")
    }

    pub fn metrics_file(&self, raw_units: bool) -> PathBuf {
        let name = if raw_units { "metrics_raw.csv" } else { "metrics.csv" };
        self.root.join("evaluate").join(name)
    }

    pub fn report_dir(&self) -> PathBuf {
        self.root.join("report")
    }

    pub fn lock_file(&self) -> PathBuf {
        self.root.join(".lock")
    }
}

/// One command per output directory at a time; dropped on exit.
pub struct StageLock {
    path: PathBuf,
}

impl StageLock {
    pub fn acquire(layout: &OutLayout) -> Result<StageLock> {
        fs::create_dir_all(layout.root())?;
        let path = layout.lock_file();
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(StageLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(CliError::LockHeld(format!("{path:?}")))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for StageLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
