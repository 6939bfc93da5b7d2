//! CSV tables and run manifests.

use std::path::Path;
use std::process::Command;
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::Config;

/// Numeric table written as CSV; `None` cells stay empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(headers: Vec<String>) -> Self {
        Self { headers, rows: Vec::new() }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.map(number).unwrap_or_default()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal, in exponent form outside `[1e-5, 1e16)`.
/// Both forms are locale independent.
pub fn number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub hetnet_cli: &'static str,
    pub hetnet_core: &'static str,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub analytical_seconds: f64,
    pub simulation_seconds: f64,
    pub total_seconds: f64,
}

impl Timings {
    pub fn new(analytical: Duration, simulation: Duration, total: Duration) -> Self {
        Self {
            analytical_seconds: analytical.as_secs_f64(),
            simulation_seconds: simulation.as_secs_f64(),
            total_seconds: total.as_secs_f64(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub name: String,
    pub points: usize,
    pub first: f64,
    pub last: f64,
}

/// Provenance of one run. Timings live here so the CSV stays reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub subcommand: String,
    pub csv: String,
    pub config_sha256: String,
    pub seed: u64,
    pub trials: usize,
    pub git_describe: String,
    pub versions: Versions,
    pub timings: Timings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepRecord>,
    pub config: Config,
}

impl Manifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).context("serializing manifest")?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

pub fn versions() -> Versions {
    Versions { hetnet_cli: env!("CARGO_PKG_VERSION"), hetnet_core: hetnet_core::VERSION }
}

/// `git describe` of the working directory, or `unknown` outside a checkout.
pub fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}
