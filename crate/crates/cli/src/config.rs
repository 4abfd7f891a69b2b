//! JSON run configuration.

use std::path::Path;

use hhvix::mc::SimConfig;
use hhvix::{AssumptionConfig, JumpLaw, ModelParams, QuadratureConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub jump: JumpLaw,
    #[serde(default)]
    pub shift_a: f64,
    #[serde(default)]
    pub assumption: AssumptionConfig,
    #[serde(default)]
    pub pricing: PricingSection,
    #[serde(default)]
    pub sim: Option<SimConfig>,
    #[serde(default)]
    pub output: OutputSection,
}

/// Pricing inputs; any field may instead come from the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingSection {
    pub t: Option<f64>,
    #[serde(rename = "T_mat")]
    pub t_mat: Option<f64>,
    #[serde(rename = "K")]
    pub strike: Option<f64>,
    pub v_t: Option<f64>,
    pub lambda_t: Option<f64>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub format: Format,
    pub path: Option<String>,
}

pub const DEFAULT_PATHS: usize = 100_000;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("config: {e}")))
    }

    pub fn sim_config(&self) -> SimConfig {
        self.sim.unwrap_or_else(|| SimConfig::new(DEFAULT_PATHS, 0))
    }
}
