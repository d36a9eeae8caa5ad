//! Command-line front end: TOML configs, subcommands and CSV output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use kirchpore::diagnostics::RegParam;

pub use config::RunConfig;
pub use error::CliError;

use crate::commands::Outcome;
use crate::output::{Meta, OutDir};

#[derive(Debug, Parser)]
#[command(name = "kirchpore", version, about = "Unsaturated poroelasticity in the Kirchhoff pressure")]
pub struct Cli {
    /// TOML configuration; defaults apply when omitted
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// output directory (overrides the config and the environment)
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Non-degeneracy report for the configured material
    CheckConditions {
        /// print the minimal-saturation table instead
        #[arg(long)]
        table: bool,
    },
    /// Time-step the configured problem
    Run {
        /// continue from the checkpoint of this step in the output directory
        #[arg(long)]
        restart: Option<usize>,
    },
    /// Manufactured-solution convergence study
    Mms,
    /// Regularization sweep at fixed mesh and time step
    Sweep {
        #[arg(long)]
        param: Option<RegParam>,
    },
    /// Consolidation column against the series solution
    Terzaghi,
    /// Mesh statistics of the configured problem
    MeshStats,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckConditions { .. } => "check-conditions",
            Command::Run { .. } => "run",
            Command::Mms => "mms",
            Command::Sweep { .. } => "sweep",
            Command::Terzaghi => "terzaghi",
            Command::MeshStats => "mesh-stats",
        }
    }
}

pub fn load_config(path: Option<&std::path::Path>) -> Result<RunConfig, CliError> {
    let cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one invocation and returns what it printed.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = load_config(cli.config.as_deref())?;
    let dir = cfg.out_dir(cli.out.as_deref());
    let out = OutDir::create(&dir, Meta::new(cli.command.name(), &cfg.canonical()))?;
    match &cli.command {
        Command::CheckConditions { table } => commands::check_conditions(&cfg, &out, *table),
        Command::Run { restart } => commands::run(&cfg, &out, *restart),
        Command::Mms => commands::mms(&cfg, &out),
        Command::Sweep { param } => commands::sweep(&cfg, &out, *param),
        Command::Terzaghi => commands::terzaghi(&cfg, &out),
        Command::MeshStats => commands::mesh_stats(&cfg, &out),
    }
}
