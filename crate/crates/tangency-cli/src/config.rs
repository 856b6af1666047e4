//! The run configuration document: one flat, schema-checked bag of optional
//! settings. Command-line flags override config values; unknown keys are
//! rejected.

use std::path::Path;

use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::io::read_json;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Optional command name; when present it must match the subcommand.
    pub command: Option<String>,
    // Schedule and scaffold parameters.
    pub regime: Option<String>,
    pub k: Option<usize>,
    #[serde(rename = "B")]
    pub b: Option<u32>,
    pub delta: Option<f64>,
    pub param: Option<f64>,
    pub depth: Option<usize>,
    pub domain: Option<String>,
    pub scaffold: Option<String>,
    // Graph construction.
    pub distribution: Option<String>,
    pub eta: Option<f64>,
    // Estimator parameters.
    pub s: Option<f64>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub q: Option<String>,
    pub density_exponent: Option<f64>,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub level: Option<usize>,
    pub levels: Option<String>,
    pub radii: Option<String>,
    pub offsets: Option<usize>,
    pub order: Option<usize>,
    pub resolution: Option<usize>,
    pub mode: Option<String>,
    pub function: Option<String>,
    pub scales: Option<String>,
    pub pairs: Option<usize>,
    // IO.
    pub points: Option<String>,
    pub out: Option<String>,
    pub export: Option<String>,
    pub lusin: Option<String>,
    // Execution.
    pub jobs: Option<usize>,
    pub tol_factor: Option<f64>,
    pub check: Option<bool>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, command: &str) -> Result<Self> {
        let cfg: RunConfig = match path {
            Some(p) => read_json(p)?,
            None => RunConfig::default(),
        };
        if let Some(expected) = &cfg.command {
            if expected != command {
                return Err(CliError::schema(format!(
                    "config is for command '{expected}', invoked '{command}'"
                )));
            }
        }
        Ok(cfg)
    }
}
