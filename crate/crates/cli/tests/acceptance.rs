//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Set `ACCEPTANCE_VERBOSE=1` to list every individual check.

use std::collections::BTreeMap;
use std::process::{Command, ExitCode};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use hetnet_core::coverage::{coverage_noma_class, coverage_noma_tier, coverage_tbs};
use hetnet_core::params::db_to_linear;
use hetnet_core::rate::rate_noma_tier;
use hetnet_core::simulator::{run_campaign, trial_rng, Campaign, SimConfig};
use hetnet_core::validation::{self, Check, Probes, Tolerance};
use hetnet_core::{CoverageMethod, Network, NetworkParams, NomaCase, NomaThresholds, ServingPdfs, TierLabel};
use rand::Rng;

const TRIALS: usize = 100_000;
const SEED: u64 = 1;
const ALTITUDES: [f64; 6] = [50.0, 100.0, 200.0, 300.0, 400.0, 500.0];

const SUM_TO_ONE_SETS: usize = 50;
const SUM_TO_ONE_BUDGET: Duration = Duration::from_secs(60);
const LAPLACE_DRAWS: usize = 100_000;
const LAPLACE_POINTS: usize = 5;
const GC_NODES: usize = 50;
const GC_REL: f64 = 1e-3;
const GATE_GRID: usize = 20;
const DETERMINISM_TRIALS: &str = "4000";

fn net_at(h: f64) -> Network {
    Network::new(NetworkParams::default().with_altitude(h)).expect("valid altitude")
}

fn laws(net: &Network) -> ServingPdfs {
    ServingPdfs::new(net).expect("serving laws")
}

/// One 10^5-trial campaign per altitude, shared by all criteria.
fn campaign(h: f64) -> &'static Campaign {
    static CACHE: OnceLock<BTreeMap<u64, Campaign>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        ALTITUDES
            .iter()
            .map(|&h| {
                let config = SimConfig { trials: TRIALS, seed: SEED, ..SimConfig::default() };
                (h.to_bits(), run_campaign(&net_at(h), config))
            })
            .collect()
    });
    &cache[&h.to_bits()]
}

struct Outcome {
    pass: bool,
    summary: String,
    checks: Vec<Check>,
}

impl Outcome {
    fn from_checks(summary: impl Into<String>, checks: Vec<Check>) -> Self {
        let failed = checks.iter().filter(|c| !c.passes()).count();
        let worst = checks
            .iter()
            .map(|c| match (c.deviation(), c.tolerance.limit()) {
                (d, _) if d.is_nan() => f64::INFINITY,
                (d, l) if l == 0.0 => {
                    if d == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                }
                (d, l) => d / l,
            })
            .fold(0.0f64, f64::max);
        Self {
            pass: failed == 0 && !checks.is_empty(),
            summary: format!(
                "{}: {} checks, {failed} out of tolerance, worst at {:.1}% of its tolerance",
                summary.into(),
                checks.len(),
                100.0 * worst
            ),
            checks,
        }
    }

    fn flag(pass: bool, summary: String) -> Self {
        Self { pass, summary, checks: Vec::new() }
    }
}

fn sum_to_one() -> Outcome {
    let started = Instant::now();
    let mut rng = trial_rng(2024, 0);
    let mut checks = Vec::new();
    let mut rejected = 0;
    while checks.len() < SUM_TO_ONE_SETS {
        let mut p = NetworkParams::default();
        p.lambda_t = 10f64.powf(rng.random_range(-6.0..-4.0));
        p.lambda_a = 10f64.powf(rng.random_range(-7.0..-4.5));
        p.h = rng.random_range(30.0..600.0);
        p.r_f = rng.random_range(1.0..1.5) * p.h;
        p.r_b = rng.random_range(50.0..400.0);
        p.alpha_n = rng.random_range(2.5..4.0);
        p.alpha_l = rng.random_range(2.0..p.alpha_n);
        p.alpha_t = rng.random_range(2.0..3.0);
        p.c_n_db = rng.random_range(0.0..20.0);
        p.c_l_db = rng.random_range(0.0..10.0);
        p.c_t_db = rng.random_range(0.0..10.0);
        p.m_t = rng.random_range(1..4);
        p.m_l = rng.random_range(1..4);
        p.m_n = rng.random_range(1..4);
        p.p_t_dbm = rng.random_range(10.0..40.0);
        p.p_a_dbm = rng.random_range(30.0..60.0);
        p.n_t = [1, 2, 4, 8, 16, 32][rng.random_range(0..6)];
        let Ok(net) = Network::new(p) else {
            rejected += 1;
            continue;
        };
        match validation::sum_to_one(&net) {
            Ok(c) => checks.push(c),
            Err(e) => checks.push(Check::new(format!("error: {e}"), f64::NAN, 1.0, 0.0, Tolerance::Absolute(0.0))),
        }
    }
    let elapsed = started.elapsed();
    let mut out = Outcome::from_checks(
        format!("sum-to-one over {SUM_TO_ONE_SETS} random sets ({rejected} invalid draws skipped)"),
        checks,
    );
    out.pass &= elapsed < SUM_TO_ONE_BUDGET;
    out.summary += &format!(", {:.2} s of {} s", elapsed.as_secs_f64(), SUM_TO_ONE_BUDGET.as_secs());
    out
}

fn association() -> Outcome {
    let checks = ALTITUDES
        .iter()
        .flat_map(|&h| {
            validation::association_checks(&laws(&net_at(h)), campaign(h)).into_iter().map(move |mut c| {
                c.metric = format!("{} h={h}", c.metric);
                c
            })
        })
        .collect();
    Outcome::from_checks(format!("association vs {TRIALS} trials at h = {ALTITUDES:?}"), checks)
}

fn laplace() -> Outcome {
    let net = net_at(200.0);
    let mut checks = validation::laplace_checks(&net, LAPLACE_DRAWS, SEED, LAPLACE_POINTS).expect("laplace checks");
    for m in [1, 2] {
        let p = NetworkParams { m_t: m, alpha_t: 2.0, ..NetworkParams::default() };
        let net = Network::new(p).expect("valid");
        checks.extend(
            validation::laplace_closed_form_checks(&net, validation::LAPLACE_TBS_DISTANCE, LAPLACE_POINTS)
                .expect("closed form"),
        );
    }
    Outcome::from_checks(
        format!("interference transforms vs {LAPLACE_DRAWS} field draws, closed form vs quadrature"),
        checks,
    )
}

fn coverage() -> Outcome {
    let probes = Probes::default();
    let net = net_at(200.0);
    let mut checks = validation::coverage_tbs_checks(&laws(&net), campaign(200.0), &probes.nu_db).expect("tbs");
    for h in [100.0, 200.0, 300.0] {
        checks.extend(
            validation::coverage_noma_checks(&net_at(h), campaign(h), &probes.eps_db, &[0.0, 0.1]).expect("noma"),
        );
    }
    Outcome::from_checks("coverage vs simulation", checks)
}

fn gauss_chebyshev() -> Outcome {
    let net = net_at(200.0);
    let mut quad = net.quad;
    quad.nodes = GC_NODES;
    let gc_net = net.clone().with_quadrature(quad);
    let (adaptive, gc) = (laws(&net), laws(&gc_net));
    let checks = (-10..=10)
        .map(|nu_db| {
            let nu = db_to_linear(nu_db as f64);
            let reference = coverage_tbs(&adaptive, nu, CoverageMethod::Alzer).expect("alzer").value;
            let value = coverage_tbs(&gc, nu, CoverageMethod::GaussChebyshev).expect("gc").value;
            Check::new(format!("GC nu={nu_db}dB"), value, reference, 0.0, Tolerance::Relative(GC_REL))
        })
        .collect();
    Outcome::from_checks(format!("Gauss-Chebyshev with {GC_NODES} nodes vs adaptive quadrature"), checks)
}

/// `count` points spread evenly in log scale over `boundary * [0.8, 1.25]`.
fn straddle(boundary: f64, count: usize) -> Vec<f64> {
    validation::log_spaced(0.8 * boundary, 1.25 * boundary, count)
}

fn feasibility_gates() -> Outcome {
    let net = net_at(200.0);
    let laws = laws(&net);
    let mc = campaign(200.0);
    let p = &net.params;
    let r_f = p.r_f;
    let small = db_to_linear(-10.0);
    // (label, case, thresholds, infeasible)
    let mut probes: Vec<(String, NomaCase, NomaThresholds, bool)> = Vec::new();
    for eps_f in straddle(p.a_m / p.a_n, GATE_GRID) {
        probes.push((
            format!("near eps_f={eps_f:.4}"),
            NomaCase::Near,
            NomaThresholds::new(eps_f, small),
            p.a_m - p.a_n * eps_f <= 0.0,
        ));
    }
    for eps_t in straddle(p.a_n / (p.beta * p.a_m), GATE_GRID) {
        probes.push((
            format!("near eps_t={eps_t:.4}"),
            NomaCase::Near,
            NomaThresholds::new(small, eps_t),
            p.a_n - p.beta * p.a_m * eps_t <= 0.0,
        ));
    }
    for eps_t in straddle(p.a_m / p.a_n, GATE_GRID) {
        probes.push((
            format!("far eps_t={eps_t:.4}"),
            NomaCase::Far,
            NomaThresholds::new(small, eps_t),
            p.a_m - p.a_n * eps_t <= 0.0,
        ));
    }
    let mut checks = Vec::new();
    let mut straddles = [0usize; 2];
    for (label, case, thr, infeasible) in probes {
        straddles[usize::from(infeasible)] += 1;
        let flagged = thr.factor(&net, case).is_none();
        for tier in [TierLabel::LosAbs, TierLabel::NlosAbs] {
            let class = coverage_noma_class(&laws, tier, &thr).expect("class coverage");
            let value = if case == NomaCase::Near { class.near } else { class.far };
            let feasible_flag = if case == NomaCase::Near { class.near_feasible } else { class.far_feasible };
            checks.push(Check::new(
                format!("{label} {tier:?} gate flag"),
                f64::from(u8::from(flagged == infeasible && feasible_flag != infeasible)),
                1.0,
                0.0,
                Tolerance::Absolute(0.0),
            ));
            if infeasible {
                checks.push(Check::new(
                    format!("{label} {tier:?} analytical"),
                    value,
                    0.0,
                    0.0,
                    Tolerance::Absolute(0.0),
                ));
            }
        }
        if infeasible {
            let near = case == NomaCase::Near;
            let sim = mc.coverage_noma_where(thr.eps_f, thr.eps_t, |r| (r.distance <= r_f) == near);
            checks.push(Check::new(format!("{label} simulated"), sim.mean, 0.0, 0.0, Tolerance::Absolute(0.0)));
        }
    }
    let mut out = Outcome::from_checks(
        format!(
            "feasibility gates on 3 x {GATE_GRID}-point grids ({} feasible, {} infeasible points)",
            straddles[0], straddles[1]
        ),
        checks,
    );
    out.pass &= straddles[0] > 0 && straddles[1] > 0;
    out
}

fn non_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0])
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn qualitative() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut record = |ok: bool, note: String| {
        pass &= ok;
        notes.push(format!("{}{note}", if ok { "" } else { "NOT " }));
    };

    // (i) ABS association rises then falls in altitude
    let abs: Vec<f64> = ALTITUDES.iter().map(|&h| laws(&net_at(h)).assoc().abs()).collect();
    let peak = (0..abs.len()).max_by(|&a, &b| abs[a].total_cmp(&abs[b])).unwrap();
    let unimodal = peak > 0
        && peak + 1 < abs.len()
        && abs[..=peak].windows(2).all(|w| w[1] > w[0])
        && abs[peak..].windows(2).all(|w| w[1] < w[0]);
    let mc = |h: f64| campaign(h).abs_association();
    let (lo, top, hi) = (mc(ALTITUDES[0]), mc(ALTITUDES[peak]), mc(*ALTITUDES.last().unwrap()));
    let mc_rise_fall = top.mean - lo.mean > 3.0 * (top.se + lo.se) && top.mean - hi.mean > 3.0 * (top.se + hi.se);
    record(
        unimodal && mc_rise_fall,
        format!(
            "A_L+A_N rises then falls, peak at h={} ({:.3}; MC {:.3}/{:.3}/{:.3})",
            ALTITUDES[peak], abs[peak], lo.mean, top.mean, hi.mean
        ),
    );

    // (ii) NOMA beats the OMA baseline
    let net = net_at(200.0);
    let thr = NomaThresholds::from_db(0.0, 0.0);
    let noma = coverage_noma_tier(&laws(&net), &thr).expect("noma").value;
    let sim = campaign(200.0);
    let (noma_mc, oma_mc) = (sim.coverage_noma(thr.eps_f, thr.eps_t), sim.coverage_oma(thr.eps_t));
    record(
        noma > oma_mc.mean + 3.0 * oma_mc.se && noma_mc.mean > oma_mc.mean + 3.0 * (noma_mc.se + oma_mc.se),
        format!("NOMA coverage {noma:.3} (MC {:.3}) > OMA MC {:.3}", noma_mc.mean, oma_mc.mean),
    );

    // (iii) coverage and rate non-increasing in the SIC residue
    let betas = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25];
    let (mut cov, mut rate) = (Vec::new(), Vec::new());
    for &beta in &betas {
        let l = laws(&Network::new(NetworkParams { beta, ..NetworkParams::default() }).expect("valid"));
        cov.push(coverage_noma_tier(&l, &thr).expect("coverage").value);
        rate.push(rate_noma_tier(&l).expect("rate").value);
    }
    let (first, last) = (sim.with_beta(betas[0]), sim.with_beta(*betas.last().unwrap()));
    let mc_cov = [first.coverage_noma(thr.eps_f, thr.eps_t).mean, last.coverage_noma(thr.eps_f, thr.eps_t).mean];
    let mc_rate = [first.rate_noma().mean, last.rate_noma().mean];
    record(
        non_increasing(&cov) && non_increasing(&rate) && mc_cov[1] <= mc_cov[0] && mc_rate[1] <= mc_rate[0],
        format!(
            "coverage {:.3}->{:.3} and R_A {:.3}->{:.3} non-increasing in beta (MC {:.3}->{:.3}, {:.3}->{:.3})",
            cov[0], cov[5], rate[0], rate[5], mc_cov[0], mc_cov[1], mc_rate[0], mc_rate[1]
        ),
    );

    // (iv) rate decreasing in altitude without SIC residue
    let rates: Vec<f64> = ALTITUDES
        .iter()
        .map(|&h| {
            let p = NetworkParams { beta: 0.0, ..NetworkParams::default().with_altitude(h) };
            rate_noma_tier(&laws(&Network::new(p).expect("valid"))).expect("rate").value
        })
        .collect();
    let ends = [
        campaign(ALTITUDES[0]).with_beta(0.0).rate_noma(),
        campaign(*ALTITUDES.last().unwrap()).with_beta(0.0).rate_noma(),
    ];
    record(
        strictly_decreasing(&rates) && ends[0].mean - ends[1].mean > 3.0 * (ends[0].se + ends[1].se),
        format!(
            "R_A {:.3}->{:.3} decreasing in h at beta=0 (MC {:.3}->{:.3})",
            rates[0], rates[5], ends[0].mean, ends[1].mean
        ),
    );

    Outcome::flag(pass, format!("figure shapes: {}", notes.join("; ")))
}

fn run_cli(threads: usize, out: &std::path::Path, args: &[&str]) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_hetnet"))
        .args(args)
        .args(["--trials", DETERMINISM_TRIALS, "--seed", "7", "--out"])
        .arg(out)
        .env("RAYON_NUM_THREADS", threads.to_string())
        .output()
        .expect("hetnet runs");
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = out.read_dir().unwrap().flatten().find(|e| e.path().extension().is_some_and(|x| x == "csv")).unwrap();
    std::fs::read(csv.path()).unwrap()
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 2] =
        [&["coverage-noma", "--sweep", "eps_dB=-4:4:4"], &["association", "--sweep", "h=100:300:100"]];
    let mut same = true;
    let mut compared = 0;
    for args in runs {
        let mut outputs = Vec::new();
        for threads in [1, 3, 1] {
            let dir = tempfile::tempdir().unwrap();
            outputs.push(run_cli(threads, dir.path(), args));
        }
        same &= outputs.windows(2).all(|w| w[0] == w[1]);
        compared += outputs.len();
    }
    Outcome::flag(
        same,
        format!("determinism: {compared} CSVs from 1 and 3 worker threads are byte-identical per command"),
    )
}

fn rates() -> Outcome {
    let net = net_at(200.0);
    let checks = validation::rate_checks(&laws(&net), campaign(200.0)).expect("rates");
    Outcome::from_checks(format!("rates vs {TRIALS} trials"), checks)
}

fn main() -> ExitCode {
    let verbose = std::env::var_os("ACCEPTANCE_VERBOSE").is_some();
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("sum-to-one", sum_to_one),
        ("association cross-validation", association),
        ("laplace cross-validation", laplace),
        ("coverage cross-validation", coverage),
        ("gauss-chebyshev accuracy", gauss_chebyshev),
        ("feasibility gates", feasibility_gates),
        ("qualitative shapes", qualitative),
        ("determinism", determinism),
        ("rate cross-validation", rates),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        let started = Instant::now();
        let out = criterion();
        println!(
            "{} {name} [{:.1} s] {}",
            if out.pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64(),
            out.summary
        );
        for c in out.checks.iter().filter(|c| verbose || !c.passes()) {
            println!("    {c}");
        }
        failed += usize::from(!out.pass);
    }
    if failed == 0 {
        println!("acceptance: all {} criteria pass", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria fail", criteria.len());
        ExitCode::FAILURE
    }
}
