//! Batch command-line surface for the forecasting pipeline.
//!
//! Stages write their artifacts under the configured output directory and
//! skip work whose outputs already match the current config hash, so an
//! interrupted pipeline resumes where it left off.

mod artifacts;
mod commands;
mod config;
mod data_io;
mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use artifacts::StageLock;
use commands::StageContext;
use config::RunConfig;
use error::{CliError, Result};

#[derive(Parser)]
#[command(name = "wolfcast", version, about = "Swarm-calibrated ensemble forecasting pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the bundled synthetic dataset (three CSV files).
    Synth(SynthArgs),
    /// Validate, align and normalize the input series; write the dataset manifest.
    Ingest(StageArgs),
    /// Search hyperparameters for each architecture.
    Calibrate(StageArgs),
    /// Train final models with their calibrated configurations and emit forecasts.
    Train(StageArgs),
    /// Optimize ensemble weights on the validation slice and blend the test forecasts.
    Blend(StageArgs),
    /// Score every model and the ensemble on the test slice.
    Evaluate(StageArgs),
    /// Export convergence traces, actual-vs-predicted tables, and runtime summaries.
    Report(StageArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Directory receiving brent.csv, usdx.csv, sent.csv.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 420)]
    days: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Half-width of the additive noise on the target series.
    #[arg(long, default_value_t = 0.6)]
    noise: f64,
}

#[derive(Args)]
struct StageArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's model list (comma-separated architecture names).
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Recompute even when outputs are up to date.
    #[arg(long)]
    force: bool,
}

impl StageArgs {
    fn context(&self) -> Result<StageContext> {
        let mut config = RunConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        if let Some(models) = &self.models {
            config.models = models.clone();
        }
        config.validate()?;
        Ok(StageContext::new(config, self.force))
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(args) => {
            if !(args.noise >= 0.0 && args.noise.is_finite()) {
                return Err(CliError::InvalidArgument(format!(
                    "noise must be non-negative, got {}",
                    args.noise
                )));
            }
            if args.days < 20 {
                return Err(CliError::InvalidArgument(format!(
                    "synthetic dataset needs at least 20 days, got {}",
                    args.days
                )));
            }
            commands::cmd_synth(&args.out, args.days, args.seed, args.noise)
        }
        Command::Ingest(args) => with_lock(&args, commands::cmd_ingest),
        Command::Calibrate(args) => with_lock(&args, commands::cmd_calibrate),
        Command::Train(args) => with_lock(&args, commands::cmd_train),
        Command::Blend(args) => with_lock(&args, commands::cmd_blend),
        Command::Evaluate(args) => with_lock(&args, commands::cmd_evaluate),
        Command::Report(args) => with_lock(&args, commands::cmd_report),
    }
}

fn with_lock(args: &StageArgs, f: impl FnOnce(&StageContext) -> Result<()>) -> Result<()> {
    let ctx = args.context()?;
    let _lock = StageLock::acquire(&ctx.layout)?;
    f(&ctx)
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{}", e.to_json());
        std::process::exit(1);
    }
}
