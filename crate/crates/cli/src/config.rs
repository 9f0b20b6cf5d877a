//! Run configuration: a sectioned TOML file. Every section and key is
//! optional; unknown ones are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use simply_core::explorer::SweepGrid;
use simply_core::stats::MIN_TRIALS;
use simply_core::{DeviceParams, OperatingPoint};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Campaign {
    pub seed: u64,
    pub trials: usize,
}

impl Default for Campaign {
    fn default() -> Self {
        Self { seed: 1, trials: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), format: Format::Csv }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "DeviceParams::calibrated")]
    pub device: DeviceParams,
    #[serde(default)]
    pub operating: OperatingPoint,
    #[serde(default)]
    pub campaign: Campaign,
    #[serde(default)]
    pub sweep: SweepGrid,
    #[serde(default)]
    pub output: Output,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            device: DeviceParams::calibrated(),
            operating: OperatingPoint::default(),
            campaign: Campaign::default(),
            sweep: SweepGrid::default(),
            output: Output::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |e: simply_core::Error| CliError::Config(e.to_string());
        self.device.validate().map_err(cfg)?;
        self.operating.validate().map_err(cfg)?;
        self.sweep.validate().map_err(cfg)?;
        let (lo, hi) = self.device.temperature_range();
        if !(self.operating.temperature >= lo && self.operating.temperature <= hi) {
            return Err(CliError::Config(format!("operating temperature outside [{lo}, {hi}] K")));
        }
        if self.campaign.trials < MIN_TRIALS {
            return Err(CliError::Config(format!("campaign.trials must be at least {MIN_TRIALS}")));
        }
        Ok(())
    }
}
