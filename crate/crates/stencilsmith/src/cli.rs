//! Argument parsing, configuration layering and exit codes.

use std::io::Write;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, RunConfig, Settings};
use crate::io::FormatError;
use stencilsmith_core::autotune::TuneError;
use stencilsmith_core::kernels::KernelError;
use stencilsmith_core::perfmodel::ModelError;
use stencilsmith_core::tiling::{ExecError, PlanError};

#[derive(Debug, Parser)]
#[command(
    name = "stencilsmith",
    version,
    about = "Dycore stencil kernels, tiled execution and accelerator models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check tiled execution against the reference sweep.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Drop the last tile from the plan before running.
        #[arg(long, hide = true)]
        corrupt_plan: bool,
    },
    /// Time kernels on the host and write a CSV row per kernel.
    Bench {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the accelerator model over PE counts.
    Model {
        #[command(flatten)]
        common: Common,
    },
    /// Search tile sizes for throughput against footprint.
    Tune {
        #[command(flatten)]
        common: Common,
        /// Use the built-in precision demonstration space.
        #[arg(long)]
        demo: bool,
    },
    /// Execute one kernel and write the output grid.
    Run {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args, Default)]
pub struct Common {
    #[arg(long)]
    pub kernel: Option<String>,
    /// Grid size NXxNYxNZ, halo included.
    #[arg(long)]
    pub dims: Option<String>,
    /// Tile size TXxTYxTZ.
    #[arg(long)]
    pub tile: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
    /// f32 or f64.
    #[arg(long)]
    pub precision: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub preset: Option<String>,
    /// key = value file; flags override it.
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// Extra KEY=VALUE setting; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Common {
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        for pair in &self.set {
            s.set_pair(pair)?;
        }
        let flags = [
            ("kernel", &self.kernel),
            ("dims", &self.dims),
            ("tile", &self.tile),
            ("workers", &self.workers),
            ("precision", &self.precision),
            ("seed", &self.seed),
            ("preset", &self.preset),
            ("out", &self.out),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                s.set(k, v)?;
            }
        }
        RunConfig::from_settings(&s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid tiling: {0}")]
    Plan(#[from] PlanError),
    #[error("invalid machine model: {0}")]
    Model(#[from] ModelError),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("preset `{preset}` has no calibration for {kernel}")]
    Uncalibrated { preset: String, kernel: String },
    #[error("invalid input: {0}")]
    Input(#[from] KernelError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Tune(#[from] TuneError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 1 for failed checks and runtime errors, 2 for bad configuration.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_)
            | CliError::Plan(_)
            | CliError::Model(_)
            | CliError::UnknownPreset(_)
            | CliError::Uncalibrated { .. }
            | CliError::Input(_) => 2,
            CliError::Tune(TuneError::InvalidTile { .. }) => 2,
            _ => 1,
        }
    }
}

/// Runs a parsed command, writing reports to `out`.
pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Verify {
            common,
            corrupt_plan,
        } => crate::cmd::verify::run(&common.resolve()?, *corrupt_plan, out),
        Command::Bench { common } => crate::cmd::bench::run(&common.resolve()?, out),
        Command::Model { common } => crate::cmd::model::run(&common.resolve()?, out),
        Command::Tune { common, demo } => crate::cmd::tune::run(&common.resolve()?, *demo, out),
        Command::Run { common } => crate::cmd::run::run(&common.resolve()?, out),
    }
}
