//! The seven pipeline commands.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use wolfcast_core::calibration::{calibrate, CalibrationSettings};
use wolfcast_core::data::{generate, sha256_str, write_csv, SynthConfig, HORIZON};
use wolfcast_core::ensemble::{blend, optimize_weights, ENSEMBLE_LABEL};
use wolfcast_core::forecasters::{build, ArchitectureId, ForecastMatrix, HyperParams};
use wolfcast_core::gwo::{GwoConfig, RunMetadata};
use wolfcast_core::metrics::{report, MetricReport};
use wolfcast_core::nn::{ParamManifest, TrainReport};
use wolfcast_core::rng::{derive_seed, tags};

use crate::artifacts::{
    is_fresh, read_artifact, require_fresh, write_artifact, write_stamped_csv, Artifact, OutLayout,
};
use crate::config::RunConfig;
use crate::data_io::{
    denormalize_matrix, forecast_from_csv, forecast_to_csv, load_prepared, prepare, sliced_dataset,
    test_targets, validation_targets, Prepared,
};
use crate::error::{CliError, Result};

pub struct StageContext {
    pub config: RunConfig,
    pub hash: String,
    pub layout: OutLayout,
    pub force: bool,
}

impl StageContext {
    pub fn new(config: RunConfig, force: bool) -> Self {
        let hash = config.hash();
        let layout = OutLayout::new(&config.out);
        StageContext {
            config,
            hash,
            layout,
            force,
        }
    }
}

// ---------------------------------------------------------------------------
// artifact payloads
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationArtifact {
    pub arch: ArchitectureId,
    pub label: String,
    pub best_hp: HyperParams,
    pub best_validation_mse: f64,
    pub run_seeds: Vec<u64>,
    pub eval_seed: u64,
    pub trace_files: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub arch: ArchitectureId,
    pub label: String,
    pub hp: HyperParams,
    pub feature_count: usize,
    pub train_seed: u64,
    pub train_report: TrainReport,
    pub params: ParamManifest,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightsArtifact {
    pub members: Vec<String>,
    pub weights: Vec<f64>,
    pub fitting_mse: f64,
    /// Hash of the validation-slice targets the weights were fitted on.
    pub fitting_slice_sha256: String,
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

pub fn cmd_synth(out_dir: &Path, days: usize, seed: u64, noise: f64) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let data = generate(&SynthConfig { days, seed, noise })?;
    let paths = [
        (out_dir.join("brent.csv"), &data.brent),
        (out_dir.join("usdx.csv"), &data.usdx),
        (out_dir.join("sent.csv"), &data.sent),
    ];
    for (path, series) in &paths {
        write_csv(path, series)?;
        println!("synth: wrote {} rows to {}", series.len(), path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

pub fn cmd_ingest(ctx: &StageContext) -> Result<()> {
    let manifest_path = ctx.layout.manifest();
    if !ctx.force && is_fresh(&manifest_path, &ctx.hash) {
        println!("ingest: manifest up to date, skipping");
        return Ok(());
    }
    let prepared = prepare(&ctx.config)?;
    write_artifact(
        &manifest_path,
        ctx.config.master_seed,
        &ctx.hash,
        &prepared.manifest,
    )?;
    println!(
        "ingest: {} aligned rows; validation targets start at row {}, test at row {}",
        prepared.frame.len(),
        prepared.split.val_target_start,
        prepared.split.test_target_start
    );
    println!("ingest: wrote {}", manifest_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

/// Scan a directory of artifacts, keeping those matching the config hash.
fn scan_artifacts<T: serde::de::DeserializeOwned>(
    dir: &Path,
    expected_hash: &str,
) -> Result<Vec<(PathBuf, Artifact<T>)>> {
    let mut found = Vec::new();
    if !dir.exists() {
        return Ok(found);
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    for path in paths {
        if let Ok(artifact) = read_artifact::<T>(&path) {
            if artifact.config_hash == expected_hash {
                found.push((path, artifact));
            }
        }
    }
    Ok(found)
}

fn fresh_calibration(ctx: &StageContext, arch: ArchitectureId) -> Result<Option<CalibrationArtifact>> {
    let found = scan_artifacts::<CalibrationArtifact>(&ctx.layout.calibration_dir(), &ctx.hash)?;
    Ok(found
        .into_iter()
        .map(|(_, a)| a.data)
        .find(|c| c.arch == arch))
}

pub fn cmd_calibrate(ctx: &StageContext) -> Result<()> {
    let prepared = load_prepared(&ctx.config, &ctx.layout, &ctx.hash)?;
    let archs = ctx.config.architectures()?;
    let settings = CalibrationSettings {
        pop_size: ctx.config.gwo.pop_size,
        iterations: ctx.config.gwo.iterations,
        runs: ctx.config.gwo.runs,
    };
    let train_config = ctx.config.train_config(0);

    let mut pending = Vec::new();
    for arch in archs {
        if !ctx.force {
            if let Some(existing) = fresh_calibration(ctx, arch)? {
                println!(
                    "calibrate {}: up to date (best validation MSE {:.6e}), skipping",
                    existing.label, existing.best_validation_mse
                );
                continue;
            }
        }
        pending.push(arch);
    }

    let results: Vec<_> = pending
        .par_iter()
        .map(|&arch| {
            calibrate(
                arch,
                &prepared.frame,
                &prepared.split,
                &settings,
                &train_config,
                ctx.config.master_seed,
            )
        })
        .collect();

    for (arch, result) in pending.iter().zip(results) {
        let result = result?;
        let mut trace_files = Vec::new();
        for (k, trace) in result.traces.iter().enumerate() {
            let trace_path = ctx.layout.trace_file(&result.label, k);
            let mut body = Vec::new();
            trace.write_csv(&mut body)?;
            write_stamped_csv(
                &trace_path,
                ctx.config.master_seed,
                &ctx.hash,
                &String::from_utf8_lossy(&body),
            )?;
            let meta = RunMetadata::from_run(
                &GwoConfig::new(settings.pop_size, settings.iterations, result.run_seeds[k]),
                trace,
            );
            write_artifact(
                &ctx.layout.trace_meta_file(&result.label, k),
                ctx.config.master_seed,
                &ctx.hash,
                &meta,
            )?;
            trace_files.push(crate::data_io::file_name(&trace_path));
        }
        let artifact = CalibrationArtifact {
            arch: *arch,
            label: result.label.clone(),
            best_hp: result.best_hp,
            best_validation_mse: result.best_validation_mse,
            run_seeds: result.run_seeds.clone(),
            eval_seed: result.eval_seed,
            trace_files,
        };
        write_artifact(
            &ctx.layout.calibration_file(&result.label),
            ctx.config.master_seed,
            &ctx.hash,
            &artifact,
        )?;
        println!(
            "calibrate {}: best validation MSE {:.6e} (window {}, lr {:.4}, h {}, {}, dropout {:.4})",
            result.label,
            result.best_validation_mse,
            result.best_hp.window,
            result.best_hp.learning_rate,
            result.best_hp.hidden_units(),
            result.best_hp.optimizer.name(),
            result.best_hp.dropout,
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

fn require_calibration(ctx: &StageContext, arch: ArchitectureId) -> Result<CalibrationArtifact> {
    fresh_calibration(ctx, arch)?.ok_or_else(|| {
        CliError::missing_stage(
            "calibrate",
            format!(
                "no up-to-date calibration for {}; run `wolfcast calibrate` first",
                arch.name()
            ),
        )
    })
}

pub fn cmd_train(ctx: &StageContext) -> Result<()> {
    let prepared = load_prepared(&ctx.config, &ctx.layout, &ctx.hash)?;
    let archs = ctx.config.architectures()?;

    let mut pending = Vec::new();
    for arch in archs {
        let calibration = require_calibration(ctx, arch)?;
        if !ctx.force && is_fresh(&ctx.layout.model_file(&calibration.label), &ctx.hash) {
            println!("train {}: up to date, skipping", calibration.label);
            continue;
        }
        pending.push(calibration);
    }

    let outputs: Vec<Result<_>> = pending
        .par_iter()
        .map(|calibration| train_one(ctx, &prepared, calibration))
        .collect();

    for out in outputs {
        let (artifact, val_csv, test_csv) = out?;
        write_artifact(
            &ctx.layout.model_file(&artifact.label),
            ctx.config.master_seed,
            &ctx.hash,
            &artifact,
        )?;
        write_stamped_csv(
            &ctx.layout.forecast_file(&artifact.label, "validation"),
            ctx.config.master_seed,
            &ctx.hash,
            &val_csv,
        )?;
        write_stamped_csv(
            &ctx.layout.forecast_file(&artifact.label, "test"),
            ctx.config.master_seed,
            &ctx.hash,
            &test_csv,
        )?;
        println!(
            "train {}: {} epochs, best validation MSE {:.6e}",
            artifact.label, artifact.train_report.epochs_run, artifact.train_report.best_validation_mse
        );
    }
    Ok(())
}

fn train_one(
    ctx: &StageContext,
    prepared: &Prepared,
    calibration: &CalibrationArtifact,
) -> Result<(ModelArtifact, String, String)> {
    let hp = calibration.best_hp;
    let slices = sliced_dataset(&prepared.frame, &prepared.split, hp.features, hp.window)?;
    // Reuse the seed the winning configuration was scored under, so the
    // final model is the same instance the search validated (possibly
    // trained longer under the final budget).
    let train_seed = calibration.eval_seed;

    let mut model = build(calibration.arch, &hp, hp.features.feature_count())?;
    let config = ctx.config.final_train_config(train_seed);
    let train_report = model.fit_with_validation(&slices.train, &slices.validation, &config)?;

    let val_forecast = model.predict(&slices.validation.x)?;
    let test_forecast = model.predict(&slices.test.x)?;
    let val_csv = forecast_to_csv(
        &val_forecast.values,
        &prepared.frame,
        prepared.split.val_target_start,
    );
    let test_csv = forecast_to_csv(
        &test_forecast.values,
        &prepared.frame,
        prepared.split.test_target_start,
    );

    Ok((
        ModelArtifact {
            arch: calibration.arch,
            label: calibration.label.clone(),
            hp,
            feature_count: hp.features.feature_count(),
            train_seed,
            train_report,
            params: model.network().export_params(),
        },
        val_csv,
        test_csv,
    ))
}

// ---------------------------------------------------------------------------
// blend
// ---------------------------------------------------------------------------

fn trained_labels(ctx: &StageContext) -> Result<Vec<String>> {
    let found = scan_artifacts::<ModelArtifact>(&ctx.layout.root().join("models"), &ctx.hash)?;
    let mut labels: Vec<String> = found.into_iter().map(|(_, a)| a.data.label).collect();
    labels.sort();
    Ok(labels)
}

fn member_labels(ctx: &StageContext) -> Result<Vec<String>> {
    let trained = trained_labels(ctx)?;
    if trained.is_empty() {
        return Err(CliError::missing_stage(
            "train",
            "no up-to-date trained models found; run `wolfcast train` first",
        ));
    }
    match &ctx.config.ensemble_members {
        None => Ok(trained),
        Some(requested) => {
            for label in requested {
                if !trained.contains(label) {
                    return Err(CliError::missing_stage(
                        "train",
                        format!("ensemble member '{label}' has no up-to-date trained model"),
                    ));
                }
            }
            Ok(requested.clone())
        }
    }
}

fn load_forecast(ctx: &StageContext, label: &str, slice: &str) -> Result<ForecastMatrix> {
    let (path, stage) = if label == ENSEMBLE_LABEL {
        (ctx.layout.ensemble_forecast(), "blend")
    } else {
        (ctx.layout.forecast_file(label, slice), "train")
    };
    let lines = crate::artifacts::read_stamped_csv(&path, &ctx.hash, stage)?;
    forecast_from_csv(&lines, label)
}

pub fn cmd_blend(ctx: &StageContext) -> Result<()> {
    let prepared = load_prepared(&ctx.config, &ctx.layout, &ctx.hash)?;
    let weights_path = ctx.layout.weights_file();
    if !ctx.force && is_fresh(&weights_path, &ctx.hash) && ctx.layout.ensemble_forecast().exists() {
        println!("blend: weights up to date, skipping");
        return Ok(());
    }

    let members = member_labels(ctx)?;
    if members.len() < 2 {
        return Err(CliError::InvalidArgument(format!(
            "blending needs at least 2 members, found {}",
            members.len()
        )));
    }
    let val_forecasts: Vec<ForecastMatrix> = members
        .iter()
        .map(|label| load_forecast(ctx, label, "validation"))
        .collect::<Result<_>>()?;
    let targets = validation_targets(&prepared.frame, &prepared.split);
    let fitting_hash = sha256_str(&forecast_to_csv(
        &targets,
        &prepared.frame,
        prepared.split.val_target_start,
    ));

    let seed = derive_seed(ctx.config.master_seed, tags::ENSEMBLE_WEIGHTS, 0);
    let (weights, fitting_mse) = optimize_weights(
        &val_forecasts,
        &targets,
        ctx.config.gwo.pop_size.max(members.len() + 2),
        ctx.config.gwo.iterations,
        seed,
    )?;

    write_artifact(
        &weights_path,
        ctx.config.master_seed,
        &ctx.hash,
        &WeightsArtifact {
            members: members.clone(),
            weights: weights.components().to_vec(),
            fitting_mse,
            fitting_slice_sha256: fitting_hash,
        },
    )?;

    let test_forecasts: Vec<ForecastMatrix> = members
        .iter()
        .map(|label| load_forecast(ctx, label, "test"))
        .collect::<Result<_>>()?;
    let blended = blend(&test_forecasts, &weights)?;
    write_stamped_csv(
        &ctx.layout.ensemble_forecast(),
        ctx.config.master_seed,
        &ctx.hash,
        &forecast_to_csv(&blended.values, &prepared.frame, prepared.split.test_target_start),
    )?;

    println!(
        "blend: fitting MSE {:.6e} over {} members",
        fitting_mse,
        members.len()
    );
    for (label, w) in members.iter().zip(weights.components()) {
        println!("blend: weight {w:.4} for {label}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

fn metric_row(label: &str, m: &MetricReport) -> String {
    format!(
        "{label},{},{},{},{},{},{},{},{}\n",
        m.mae, m.mse, m.rmse, m.mspe, m.mape, m.r2, m.mape_excluded, m.mspe_excluded
    )
}

pub fn cmd_evaluate(ctx: &StageContext) -> Result<()> {
    let prepared = load_prepared(&ctx.config, &ctx.layout, &ctx.hash)?;
    let labels = trained_labels(ctx)?;
    if labels.is_empty() {
        return Err(CliError::missing_stage(
            "train",
            "no up-to-date trained models found; run `wolfcast train` first",
        ));
    }
    let _weights: Artifact<WeightsArtifact> =
        require_fresh(&ctx.layout.weights_file(), &ctx.hash, "blend")?;

    let targets = test_targets(&prepared.frame, &prepared.split);
    let targets_raw = denormalize_matrix(&targets, &prepared.normalizer);
    let mode = ctx.config.mspe_formula.mode();

    let mut entries: Vec<(String, ForecastMatrix)> = vec![(
        ENSEMBLE_LABEL.to_string(),
        load_forecast(ctx, ENSEMBLE_LABEL, "test").map_err(|_| {
            CliError::missing_stage("blend", "ensemble test forecast missing; run `wolfcast blend`")
        })?,
    )];
    for label in &labels {
        entries.push((label.clone(), load_forecast(ctx, label, "test")?));
    }

    let mut normalized = String::from(
        "label,mae,mse,rmse,mspe,mape,r2,mape_excluded,mspe_excluded\n",
    );
    let mut raw_units = normalized.clone();
    println!("evaluate: test metrics (normalized units)");
    for (label, forecast) in &entries {
        let m = report(targets.data(), forecast.values.data(), mode)?;
        normalized.push_str(&metric_row(label, &m));
        let raw_pred = denormalize_matrix(&forecast.values, &prepared.normalizer);
        let m_raw = report(targets_raw.data(), raw_pred.data(), mode)?;
        raw_units.push_str(&metric_row(label, &m_raw));
        println!(
            "  {label}: mse {:.6e}, rmse {:.6e}, mae {:.6e}, r2 {:.4}",
            m.mse, m.rmse, m.mae, m.r2
        );
    }

    write_stamped_csv(
        &ctx.layout.metrics_file(false),
        ctx.config.master_seed,
        &ctx.hash,
        &normalized,
    )?;
    write_stamped_csv(
        &ctx.layout.metrics_file(true),
        ctx.config.master_seed,
        &ctx.hash,
        &raw_units,
    )?;

    if let Some(reference) = &ctx.config.reference {
        let ensemble_mse = entries
            .first()
            .map(|(_, f)| report(targets.data(), f.values.data(), mode))
            .transpose()?
            .map(|m| m.mse);
        if let Some(mse) = ensemble_mse {
            println!(
                "evaluate: ensemble test MSE {mse:.6e} vs reference benchmark {:.6e}",
                reference.ensemble_mse
            );
        }
        let mut ref_csv = String::from("label,mse,window,learning_rate,dropout,hidden,optimizer\n");
        for row in &reference.models {
            ref_csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.label, row.mse, row.window, row.learning_rate, row.dropout, row.hidden, row.optimizer
            ));
        }
        write_stamped_csv(
            &ctx.layout.root().join("evaluate").join("reference.csv"),
            ctx.config.master_seed,
            &ctx.hash,
            &ref_csv,
        )?;
    }
    println!("evaluate: wrote {}", ctx.layout.metrics_file(false).display());
    Ok(())
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RuntimeRow {
    label: String,
    run: usize,
    wall_time_seconds: f64,
    evaluations: u64,
}

pub fn cmd_report(ctx: &StageContext) -> Result<()> {
    let prepared = load_prepared(&ctx.config, &ctx.layout, &ctx.hash)?;
    let report_dir = ctx.layout.report_dir();
    let summary_path = report_dir.join("runtime_summary.json");
    if !ctx.force && is_fresh(&summary_path, &ctx.hash) {
        println!("report: up to date, skipping");
        return Ok(());
    }
    std::fs::create_dir_all(&report_dir)?;

    // convergence traces, one CSV per calibration run
    let calibrations =
        scan_artifacts::<CalibrationArtifact>(&ctx.layout.calibration_dir(), &ctx.hash)?;
    if calibrations.is_empty() {
        return Err(CliError::missing_stage(
            "calibrate",
            "no up-to-date calibration artifacts; run `wolfcast calibrate` first",
        ));
    }
    let mut runtime_rows = Vec::new();
    for (_, artifact) in &calibrations {
        let c = &artifact.data;
        for (k, trace_file) in c.trace_files.iter().enumerate() {
            let src = ctx.layout.root().join("traces").join(trace_file);
            let dst = report_dir.join(format!("convergence_{}_run{k}.csv", c.label));
            std::fs::copy(&src, &dst)?;
            let meta: Artifact<RunMetadata> =
                read_artifact(&ctx.layout.trace_meta_file(&c.label, k))?;
            runtime_rows.push(RuntimeRow {
                label: c.label.clone(),
                run: k,
                wall_time_seconds: meta.data.wall_time_seconds,
                evaluations: meta.data.evaluations,
            });
        }
    }

    // actual vs predicted on the test block, normalized and raw units
    let mut entries = trained_labels(ctx)?;
    if ctx.layout.ensemble_forecast().exists() {
        entries.insert(0, ENSEMBLE_LABEL.to_string());
    }
    let targets = test_targets(&prepared.frame, &prepared.split);
    for label in &entries {
        let forecast = load_forecast(ctx, label, "test")?;
        let mut body = String::from("date,step,actual,predicted,actual_raw,predicted_raw\n");
        for i in 0..targets.shape()[0] {
            for h in 0..HORIZON {
                let date = prepared.frame.dates[prepared.split.test_target_start + i + h];
                let actual = targets.at2(i, h);
                let predicted = forecast.values.at2(i, h);
                let col = wolfcast_core::data::Column::Brent;
                body.push_str(&format!(
                    "{date},{},{actual},{predicted},{},{}\n",
                    h + 1,
                    prepared.normalizer.invert_value(col, actual),
                    prepared.normalizer.invert_value(col, predicted),
                ));
            }
        }
        write_stamped_csv(
            &report_dir.join(format!("actual_vs_predicted_{label}.csv")),
            ctx.config.master_seed,
            &ctx.hash,
            &body,
        )?;
    }

    write_artifact(&summary_path, ctx.config.master_seed, &ctx.hash, &runtime_rows)?;
    println!(
        "report: wrote {} convergence traces and {} forecast charts to {}",
        runtime_rows.len(),
        entries.len(),
        report_dir.display()
    );
    Ok(())
}

