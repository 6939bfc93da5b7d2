//! `hetnet`: sweeps of the two-tier network with the analytical engine and
//! the Monte Carlo simulator, written as CSV plus a run manifest.

mod config;
mod output;
mod run;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{Config, Method};
use hetnet_core::Check;
use output::{Manifest, SweepRecord, Timings};
use run::Kind;
use sweep::Sweep;

#[derive(Debug, Parser)]
#[command(name = "hetnet", version, about = "Two-tier mmWave/NOMA network evaluator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, clap::Args)]
struct Opts {
    /// TOML configuration; missing keys take the reference values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Monte Carlo seed; each trial draws from its own stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials per scenario; 0 runs the analytical engine only.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// TBS-tier coverage evaluation.
    #[arg(long, global = true, value_enum)]
    method: Option<Method>,
    /// Gauss-Chebyshev nodes per segment.
    #[arg(long, global = true)]
    gc_nodes: Option<usize>,
    /// `name=start:stop:step` over a network key, `nu_dB`, `eps_dB`,
    /// `eps_f_dB` or `eps_t_dB`.
    #[arg(long, global = true)]
    sweep: Option<Sweep>,
    /// SIC residue.
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// TBS SINR threshold, dB.
    #[arg(long, global = true, allow_hyphen_values = true)]
    nu_db: Option<f64>,
    /// Both NOMA thresholds, dB.
    #[arg(long, global = true, allow_hyphen_values = true)]
    eps_db: Option<f64>,
    /// Paired-UE NOMA threshold, dB.
    #[arg(long, global = true, allow_hyphen_values = true)]
    eps_f_db: Option<f64>,
    /// Typical-UE NOMA threshold, dB.
    #[arg(long, global = true, allow_hyphen_values = true)]
    eps_t_db: Option<f64>,
    /// `name=value` override of any configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "NAME=VALUE")]
    sets: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Tier association probabilities.
    Association,
    /// Coverage of the mmWave tier.
    CoverageTbs,
    /// Coverage of the NOMA tier, with the OMA baseline from simulation.
    CoverageNoma,
    /// Spectrum efficiency of both tiers.
    Rate,
    /// Cross-engine checks; exits nonzero on any tolerance breach.
    Validate,
}

impl Opts {
    fn config(&self) -> Result<Config> {
        let mut c = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        for s in &self.sets {
            let (name, value) = s.split_once('=').with_context(|| format!("--set `{s}` must look like name=value"))?;
            let value: f64 = value.trim().parse().with_context(|| format!("--set `{s}`"))?;
            c.set(name.trim(), value).with_context(|| format!("--set `{s}`"))?;
        }
        if let Some(b) = self.beta {
            c.network.beta = b;
        }
        if let Some(x) = self.nu_db {
            c.thresholds.nu_db = x;
        }
        if let Some(x) = self.eps_db {
            c.set("eps_dB", x)?;
        }
        if let Some(x) = self.eps_f_db {
            c.thresholds.eps_f_db = x;
        }
        if let Some(x) = self.eps_t_db {
            c.thresholds.eps_t_db = x;
        }
        if let Some(s) = self.seed {
            c.simulation.seed = s;
        }
        if let Some(t) = self.trials {
            c.simulation.trials = t;
        }
        if let Some(m) = self.method {
            c.analysis.method = m;
        }
        if let Some(n) = self.gc_nodes {
            c.analysis.gc_nodes = n;
        }
        c.validate()?;
        Ok(c)
    }
}

fn manifest(subcommand: &str, csv: &str, config: &Config, sweep: Option<&Sweep>, timings: Timings) -> Manifest {
    Manifest {
        subcommand: subcommand.into(),
        csv: csv.into(),
        config_sha256: config.digest(),
        seed: config.simulation.seed,
        trials: config.simulation.trials,
        git_describe: output::git_describe(),
        versions: output::versions(),
        timings,
        sweep: sweep.map(|s| SweepRecord {
            name: s.name.clone(),
            points: s.values.len(),
            first: s.values[0],
            last: s.values[s.values.len() - 1],
        }),
        config: config.clone(),
    }
}

fn sweep_run(kind: Kind, config: &Config, sweep: Option<&Sweep>, out: &Path) -> Result<()> {
    let started = Instant::now();
    let (swept, points) = run::points(Some(kind), config, sweep)?;
    let (table, analytical, simulation) = run::evaluate(kind, &swept, &points)?;
    let csv = format!("{}.csv", kind.name());
    table.write_csv(&out.join(&csv))?;
    let timings = Timings::new(analytical, simulation, started.elapsed());
    manifest(kind.name(), &csv, config, sweep, timings).write(&out.join(format!("{}.manifest.toml", kind.name())))?;
    println!("wrote {} ({} rows)", out.join(&csv).display(), table.rows.len());
    Ok(())
}

fn validate_run(config: &Config, sweep: Option<&Sweep>, out: &Path) -> Result<bool> {
    if sweep.is_some() {
        anyhow::bail!("validate runs on a single configuration; drop --sweep");
    }
    let started = Instant::now();
    let checks = run::validate(config)?;
    for c in &checks {
        println!("{c}");
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passes()).map(|c| c.metric.as_str()).collect();
    write_checks(&out.join("validate.csv"), &checks)?;
    let elapsed = started.elapsed();
    manifest("validate", "validate.csv", config, None, Timings::new(elapsed, Default::default(), elapsed))
        .write(&out.join("validate.manifest.toml"))?;
    if failed.is_empty() {
        println!("all {} checks within tolerance", checks.len());
    } else {
        eprintln!("{} of {} checks out of tolerance:", failed.len(), checks.len());
        for m in &failed {
            eprintln!("  {m}");
        }
    }
    Ok(failed.is_empty())
}

fn write_checks(path: &Path, checks: &[Check]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["metric", "value", "reference", "se", "deviation", "tolerance_kind", "tolerance", "pass"])?;
    for c in checks {
        w.write_record([
            c.metric.clone(),
            output::number(c.value),
            output::number(c.reference),
            output::number(c.se),
            output::number(c.deviation()),
            c.tolerance.kind().to_string(),
            output::number(c.tolerance.limit()),
            u8::from(c.passes()).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| -> Result<bool> {
        let config = cli.opts.config()?;
        let out = &cli.opts.out;
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        let sweep = cli.opts.sweep.as_ref();
        let kind = match cli.command {
            Cmd::Association => Kind::Association,
            Cmd::CoverageTbs => Kind::CoverageTbs,
            Cmd::CoverageNoma => Kind::CoverageNoma,
            Cmd::Rate => Kind::Rate,
            Cmd::Validate => return validate_run(&config, sweep, out),
        };
        sweep_run(kind, &config, sweep, out)?;
        Ok(true)
    })();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
