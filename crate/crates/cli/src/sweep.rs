//! `name=start:stop:step` sweep specifications.

use std::str::FromStr;

use anyhow::{anyhow, bail, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub name: String,
    pub values: Vec<f64>,
}

/// Round to 12 significant digits so that `0.1 + 2 * 0.1` prints as `0.3`.
fn tidy(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

impl FromStr for Sweep {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, range) =
            s.split_once('=').ok_or_else(|| anyhow!("sweep `{s}` must look like name=start:stop:step"))?;
        let parts: Vec<&str> = range.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            bail!("sweep `{s}` must look like name=start:stop:step");
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| anyhow!("sweep `{s}`: `{t}`: {e}"));
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            bail!("sweep `{s}`: bounds and step must be finite");
        }
        if step == 0.0 || (stop - start) * step < 0.0 {
            bail!("sweep `{s}`: step must be nonzero and point from start to stop");
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 100_000 {
            bail!("sweep `{s}` has {count} points");
        }
        let name = name.trim().to_string();
        if name.is_empty() {
            bail!("sweep `{s}` names no parameter");
        }
        Ok(Self { name, values: (0..count).map(|i| tidy(start + i as f64 * step)).collect() })
    }
}
