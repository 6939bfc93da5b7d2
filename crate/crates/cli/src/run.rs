//! Sweep evaluation with both engines.

use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use hetnet_core::coverage::{coverage_noma_tier, coverage_tbs};
use hetnet_core::params::db_to_linear;
use hetnet_core::rate::{rate_noma_tier, rate_tbs};
use hetnet_core::simulator::{run_campaign, Campaign, Estimate, SimConfig};
use hetnet_core::validation::{self, Check, Probes};
use hetnet_core::{Network, NetworkParams, NomaThresholds, ServingPdfs, TierLabel};
use rayon::prelude::*;

use crate::config::Config;
use crate::output::Table;
use crate::sweep::Sweep;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Association,
    CoverageTbs,
    CoverageNoma,
    Rate,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Association => "association",
            Kind::CoverageTbs => "coverage_tbs",
            Kind::CoverageNoma => "coverage_noma",
            Kind::Rate => "rate",
        }
    }

    fn analytical_columns(self) -> &'static [&'static str] {
        match self {
            Kind::Association => &["A_T", "A_L", "A_N"],
            Kind::CoverageTbs => &["P_T_C"],
            Kind::CoverageNoma => &["P_A_C"],
            Kind::Rate => &["R_T", "R_A"],
        }
    }

    /// Monte Carlo estimates; each gets a `_MC` and a `_SE` column.
    fn simulated_columns(self) -> &'static [&'static str] {
        match self {
            Kind::Association => &["A_T", "A_L", "A_N"],
            Kind::CoverageTbs => &["P_T_C"],
            Kind::CoverageNoma => &["P_A_C", "P_A_C_OMA"],
            Kind::Rate => &["R_T", "R_A", "R_A_OMA"],
        }
    }

    fn uses(self, name: &str) -> bool {
        match name {
            "nu_dB" => self == Kind::CoverageTbs,
            "eps_dB" | "eps_f_dB" | "eps_t_dB" => self == Kind::CoverageNoma,
            _ => true,
        }
    }

    pub fn headers(self, swept: &str) -> Vec<String> {
        let mut h = vec![swept.to_string()];
        h.extend(self.analytical_columns().iter().map(|c| c.to_string()));
        for c in self.simulated_columns() {
            h.push(format!("{c}_MC"));
            h.push(format!("{c}_SE"));
        }
        h
    }
}

/// One sweep point.
#[derive(Debug, Clone)]
pub struct Point {
    pub value: f64,
    pub config: Config,
}

/// The points of `sweep` over `base`, or the single base point labelled
/// by its altitude.
pub fn points(kind: Option<Kind>, base: &Config, sweep: Option<&Sweep>) -> Result<(String, Vec<Point>)> {
    let Some(sweep) = sweep else {
        base.validate()?;
        return Ok(("h".into(), vec![Point { value: base.network.h, config: base.clone() }]));
    };
    if let Some(kind) = kind {
        if !kind.uses(&sweep.name) {
            bail!("sweeping {} has no effect on {}", sweep.name, kind.name());
        }
    }
    let points = sweep
        .values
        .iter()
        .map(|&value| {
            let mut config = base.clone();
            config.set(&sweep.name, value)?;
            config.validate().with_context(|| format!("sweep point {} = {value}", sweep.name))?;
            Ok(Point { value, config })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((sweep.name.clone(), points))
}

pub fn network(config: &Config) -> Result<Network> {
    let net = Network::new(config.network.clone())?;
    let mut quad = net.quad;
    quad.nodes = config.analysis.gc_nodes;
    Ok(net.with_quadrature(quad))
}

/// Trial records do not depend on the SIC residue.
fn campaign_key(p: &NetworkParams) -> NetworkParams {
    NetworkParams { beta: 0.0, ..p.clone() }
}

/// One campaign per distinct scenario, shared by points that differ only
/// in thresholds or SIC residue.
fn campaigns(points: &[Point]) -> Result<Vec<Option<Campaign>>> {
    let mut done: Vec<(NetworkParams, Campaign)> = Vec::new();
    let mut out = Vec::with_capacity(points.len());
    for pt in points {
        let sim = &pt.config.simulation;
        if sim.trials == 0 {
            out.push(None);
            continue;
        }
        let key = campaign_key(&pt.config.network);
        let hit = done.iter().find(|(k, c)| *k == key && c.config.trials == sim.trials && c.config.seed == sim.seed);
        let campaign = match hit {
            Some((_, c)) => c.with_beta(pt.config.network.beta),
            None => {
                let config = SimConfig { trials: sim.trials, seed: sim.seed, ..SimConfig::default() };
                let c = run_campaign(&network(&pt.config)?, config);
                done.push((key, c.clone()));
                c
            }
        };
        out.push(Some(campaign));
    }
    Ok(out)
}

fn analytical(kind: Kind, config: &Config) -> Result<Vec<f64>> {
    let net = network(config)?;
    let laws = ServingPdfs::new(&net)?;
    let t = &config.thresholds;
    Ok(match kind {
        Kind::Association => {
            let a = laws.assoc();
            vec![a.a_t, a.a_l, a.a_n]
        }
        Kind::CoverageTbs => vec![coverage_tbs(&laws, db_to_linear(t.nu_db), config.analysis.method.coverage())?.value],
        Kind::CoverageNoma => vec![coverage_noma_tier(&laws, &NomaThresholds::from_db(t.eps_f_db, t.eps_t_db))?.value],
        Kind::Rate => vec![rate_tbs(&laws)?.value, rate_noma_tier(&laws)?.value],
    })
}

fn simulated(kind: Kind, config: &Config, mc: &Campaign) -> Vec<Estimate> {
    let t = &config.thresholds;
    match kind {
        Kind::Association => {
            vec![mc.association(TierLabel::Tbs), mc.association(TierLabel::LosAbs), mc.association(TierLabel::NlosAbs)]
        }
        Kind::CoverageTbs => vec![mc.coverage_tbs(db_to_linear(t.nu_db))],
        Kind::CoverageNoma => vec![
            mc.coverage_noma(db_to_linear(t.eps_f_db), db_to_linear(t.eps_t_db)),
            mc.coverage_oma(db_to_linear(t.eps_t_db)),
        ],
        Kind::Rate => vec![mc.rate_tbs(), mc.rate_noma(), mc.rate_oma()],
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Both engines over the sweep points, rows in sweep order.
pub fn evaluate(kind: Kind, swept: &str, points: &[Point]) -> Result<(Table, Duration, Duration)> {
    let started = Instant::now();
    let campaigns = campaigns(points)?;
    let simulation = started.elapsed();

    let results: Vec<(Vec<f64>, Duration)> = points
        .par_iter()
        .map(|pt| {
            let t = Instant::now();
            let v = analytical(kind, &pt.config).with_context(|| format!("{swept} = {}", pt.value))?;
            Ok((v, t.elapsed()))
        })
        .collect::<Result<_>>()?;
    let analytical_time = results.iter().map(|(_, d)| *d).sum();

    let mut table = Table::new(kind.headers(swept));
    for ((pt, (values, _)), mc) in points.iter().zip(results).zip(&campaigns) {
        let mut row = vec![Some(pt.value)];
        row.extend(values.into_iter().map(finite));
        match mc {
            Some(mc) => {
                for e in simulated(kind, &pt.config, mc) {
                    row.push(finite(e.mean));
                    row.push(finite(e.se));
                }
            }
            None => row.extend(std::iter::repeat_n(None, 2 * kind.simulated_columns().len())),
        }
        table.rows.push(row);
    }
    Ok((table, analytical_time, simulation))
}

/// The cross-engine suite on one configuration.
pub fn validate(config: &Config) -> Result<Vec<Check>> {
    config.validate()?;
    let sim = &config.simulation;
    if sim.trials == 0 {
        bail!("validate needs at least one Monte Carlo trial");
    }
    let net = network(config)?;
    let mut checks = vec![validation::sum_to_one(&net)?];
    if (2.0 / net.params.alpha_t).fract() == 0.0 {
        checks.extend(validation::laplace_closed_form_checks(&net, validation::LAPLACE_TBS_DISTANCE, 5)?);
    }
    checks.extend(validation::laplace_checks(&net, sim.trials, sim.seed, 5)?);
    let mc = run_campaign(&net, SimConfig { trials: sim.trials, seed: sim.seed, ..SimConfig::default() });
    let mut probes = Probes::default();
    probes.betas = vec![0.0];
    if net.params.beta != 0.0 {
        probes.betas.push(net.params.beta);
    }
    checks.extend(validation::cross_engine(&net, &mc, &probes)?);
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> Config {
        let mut c = Config::default();
        c.simulation.trials = 200;
        c
    }

    #[test]
    fn shared_campaigns_follow_beta() {
        let sweep: Sweep = "beta=0:0.2:0.1".parse().unwrap();
        let (_, pts) = points(Some(Kind::CoverageNoma), &quick(), Some(&sweep)).unwrap();
        let c = campaigns(&pts).unwrap();
        let c: Vec<&Campaign> = c.iter().map(|c| c.as_ref().unwrap()).collect();
        assert_eq!(c[2].params.beta, 0.2);
        assert_eq!(c[0].records.len(), 200);
        assert_eq!(c[0].records[7].signal, c[2].records[7].signal);
    }

    #[test]
    fn threshold_sweeps_are_checked() {
        let sweep: Sweep = "nu_dB=0:1:1".parse().unwrap();
        assert!(points(Some(Kind::Association), &quick(), Some(&sweep)).is_err());
        assert!(points(Some(Kind::CoverageTbs), &quick(), Some(&sweep)).is_ok());
    }

    #[test]
    fn invalid_point_is_reported() {
        let sweep: Sweep = "beta=0.5:1.5:0.5".parse().unwrap();
        let err = points(Some(Kind::Rate), &quick(), Some(&sweep)).unwrap_err();
        assert!(format!("{err:#}").contains("network.beta"), "{err:#}");
    }

    #[test]
    fn analytical_only_leaves_mc_empty() {
        let mut c = quick();
        c.simulation.trials = 0;
        let (name, pts) = points(Some(Kind::Association), &c, None).unwrap();
        let (t, _, _) = evaluate(Kind::Association, &name, &pts).unwrap();
        assert_eq!(t.headers.len(), 10);
        assert!(t.rows[0][1].is_some() && t.rows[0][4].is_none());
    }
}
