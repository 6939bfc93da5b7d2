//! Run configuration: scenario, thresholds, simulation and analysis settings.

use std::path::Path;

use anyhow::{bail, Context, Result};
use hetnet_core::{CoverageMethod, NetworkParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// SINR thresholds in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    #[serde(rename = "nu_dB")]
    pub nu_db: f64,
    #[serde(rename = "eps_f_dB")]
    pub eps_f_db: f64,
    #[serde(rename = "eps_t_dB")]
    pub eps_t_db: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { nu_db: 0.0, eps_f_db: 0.0, eps_t_db: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Simulation {
    /// Monte Carlo trials per scenario; 0 skips the simulator.
    pub trials: usize,
    pub seed: u64,
}

impl Default for Simulation {
    fn default() -> Self {
        Self { trials: 100_000, seed: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Alzer,
    Gc,
}

impl Method {
    pub fn coverage(self) -> CoverageMethod {
        match self {
            Method::Alzer => CoverageMethod::Alzer,
            Method::Gc => CoverageMethod::GaussChebyshev,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analysis {
    /// TBS-tier coverage evaluation.
    pub method: Method,
    /// Gauss-Chebyshev nodes per segment.
    pub gc_nodes: usize,
}

impl Default for Analysis {
    fn default() -> Self {
        Self { method: Method::Alzer, gc_nodes: 50 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub network: NetworkParams,
    pub thresholds: Thresholds,
    pub simulation: Simulation,
    pub analysis: Analysis,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Set a scenario field or a threshold by its key.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "nu_dB" => self.thresholds.nu_db = value,
            "eps_dB" => {
                self.thresholds.eps_f_db = value;
                self.thresholds.eps_t_db = value;
            }
            "eps_f_dB" => self.thresholds.eps_f_db = value,
            "eps_t_dB" => self.thresholds.eps_t_db = value,
            // the paired UE keeps its distance relative to the altitude
            "h" => self.network = self.network.with_altitude(value),
            _ => self.network.set(name, value)?,
        }
        Ok(())
    }

    /// Field-named diagnostics for every invalid entry.
    pub fn validate(&self) -> Result<()> {
        let mut errors: Vec<String> = self.network.violations().iter().map(|v| format!("network.{v}")).collect();
        for (field, value) in [
            ("nu_dB", self.thresholds.nu_db),
            ("eps_f_dB", self.thresholds.eps_f_db),
            ("eps_t_dB", self.thresholds.eps_t_db),
        ] {
            if !value.is_finite() {
                errors.push(format!("thresholds.{field} = {value}: must be finite"));
            }
        }
        if self.analysis.gc_nodes == 0 {
            errors.push("analysis.gc_nodes = 0: must be positive".into());
        }
        if !errors.is_empty() {
            bail!("invalid configuration:\n  {}", errors.join("\n  "));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is serializable")
    }

    /// SHA-256 of the canonical TOML echo.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_keeps_defaults() {
        let c: Config = toml::from_str("[network]\nh = 300.0\nR_f = 330.0\n").unwrap();
        assert_eq!(c.network.h, 300.0);
        assert_eq!(c.network.lambda_t, NetworkParams::default().lambda_t);
        assert_eq!(c.simulation, Simulation::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = toml::from_str::<Config>("[network]\nlambda = 1.0\n").unwrap_err().to_string();
        assert!(err.contains("lambda"), "{err}");
    }

    #[test]
    fn echo_round_trips() {
        let mut c = Config::default();
        c.set("eps_dB", 3.0).unwrap();
        c.set("h", 100.0).unwrap();
        let back: Config = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.digest(), c.digest());
        assert!((c.network.r_f - 110.0).abs() < 1e-9);
    }

    #[test]
    fn violations_are_field_named() {
        let mut c = Config::default();
        c.network.beta = 2.0;
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("network.beta"), "{err}");
    }
}
