//! `simply` command-line driver.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{Format, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "simply", version, about = "STT-MTJ SIMPLY logic gate simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file (TOML). Defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed; overrides `campaign.seed`.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Monte Carlo trials; overrides `campaign.trials`.
    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<usize>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Table format; overrides `output.format`.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Device curves versus temperature and bias.
    Characterize,
    /// READ Monte Carlo distributions and margins.
    Read,
    /// Per-combination error and energy report.
    Gate,
    /// Design-space maps over R_G, V_READ and V_SET.
    Sweep,
    /// Temperature study with constant and PTAT references.
    Temperature,
    /// Fit model constants and check held-out numbers.
    Calibrate,
}

impl Cli {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.campaign.seed = s;
        }
        if let Some(n) = self.trials {
            cfg.campaign.trials = n;
        }
        if let Some(d) = &self.out {
            cfg.output.dir = d.clone();
        }
        if let Some(f) = self.format {
            cfg.output.format = f;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs one command and returns the files it wrote.
pub fn run(command: Command, cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let mut sink = output::Sink::new(&cfg.output.dir, cfg.output.format)?;
    match command {
        Command::Characterize => commands::characterize(cfg, &mut sink)?,
        Command::Read => commands::read(cfg, &mut sink)?,
        Command::Gate => commands::gate(cfg, &mut sink)?,
        Command::Sweep => commands::sweep(cfg, &mut sink)?,
        Command::Temperature => commands::temperature(cfg, &mut sink)?,
        Command::Calibrate => commands::calibrate_cmd(cfg, &mut sink)?,
    }
    Ok(sink.written().to_vec())
}
