//! Cross-engine checks: analytical values against Monte Carlo estimates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::association::assoc_tbs_direct;
use crate::coverage::{coverage_noma_tier, coverage_tbs, CoverageMethod, NomaThresholds};
use crate::distances::{ServingPdfs, TierLabel};
use crate::error::Result;
use crate::laplace::{laplace_abs, laplace_tbs, laplace_tbs_closed_form, LaplaceContext};
use crate::network::Network;
use crate::numerics::QuadratureSpec;
use crate::rate::{rate_noma_tier, rate_tbs};
use crate::simulator::{empirical_laplace, interference_draws, Campaign, Estimate, Sampler};

/// Association probabilities: standard errors of the MC frequency.
pub const ASSOCIATION_SE: f64 = 3.0;
/// Coverage probabilities: absolute difference.
pub const COVERAGE_ABS: f64 = 0.03;
/// TBS-tier rate: relative difference.
pub const RATE_TBS_REL: f64 = 0.05;
/// NOMA-tier rate: relative difference.
pub const RATE_ABS_REL: f64 = 0.07;
/// Interference Laplace transforms: relative difference.
pub const LAPLACE_REL: f64 = 0.01;
/// Closed-form against numerical TBS Laplace transform: relative difference.
pub const LAPLACE_CLOSED_FORM_REL: f64 = 1e-6;
/// `A_T + A_L + A_N - 1`.
pub const SUM_TO_ONE_ABS: f64 = 1e-9;

/// TBS serving distance of the TBS Laplace check.
pub const LAPLACE_TBS_DISTANCE: f64 = 50.0;
/// Slant distance of the LoS server in the ABS Laplace check.
pub const LAPLACE_ABS_DISTANCE: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tolerance {
    Absolute(f64),
    Relative(f64),
    StdErrors(f64),
}

impl Tolerance {
    pub fn limit(self) -> f64 {
        match self {
            Tolerance::Absolute(t) | Tolerance::Relative(t) | Tolerance::StdErrors(t) => t,
        }
    }

    pub fn kind(self) -> &'static str {
        match self {
            Tolerance::Absolute(_) => "absolute",
            Tolerance::Relative(_) => "relative",
            Tolerance::StdErrors(_) => "std_errors",
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Absolute(t) => write!(f, "abs {t:e}"),
            Tolerance::Relative(t) => write!(f, "rel {t:e}"),
            Tolerance::StdErrors(k) => write!(f, "{k} SE"),
        }
    }
}

/// One comparison of a computed value against a reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub metric: String,
    pub value: f64,
    pub reference: f64,
    /// Standard error of the reference; 0 when it is exact.
    pub se: f64,
    pub tolerance: Tolerance,
}

impl Check {
    pub fn new(metric: impl Into<String>, value: f64, reference: f64, se: f64, tolerance: Tolerance) -> Self {
        Self { metric: metric.into(), value, reference, se, tolerance }
    }

    pub fn against(metric: impl Into<String>, value: f64, mc: Estimate, tolerance: Tolerance) -> Self {
        Self::new(metric, value, mc.mean, mc.se, tolerance)
    }

    /// Deviation in the units of the tolerance.
    pub fn deviation(&self) -> f64 {
        let diff = (self.value - self.reference).abs();
        match self.tolerance {
            Tolerance::Absolute(_) => diff,
            Tolerance::Relative(_) => diff / self.reference.abs(),
            Tolerance::StdErrors(_) => {
                if self.se > 0.0 {
                    diff / self.se
                } else if diff == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn passes(&self) -> bool {
        self.deviation() <= self.tolerance.limit()
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {:.6} vs {:.6} (se {:.2e}), deviation {:.3e}, tolerance {}",
            if self.passes() { "PASS" } else { "FAIL" },
            self.metric,
            self.value,
            self.reference,
            self.se,
            self.deviation(),
            self.tolerance
        )
    }
}

/// Threshold grid of a cross-engine run, in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probes {
    pub nu_db: Vec<f64>,
    pub eps_db: Vec<f64>,
    pub betas: Vec<f64>,
}

impl Default for Probes {
    fn default() -> Self {
        Self { nu_db: vec![-10.0, 0.0, 10.0], eps_db: vec![-4.0, 0.0, 4.0], betas: vec![0.0, 0.1] }
    }
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// `A_T`, computed directly from the TBS serving law, plus `A_L + A_N`.
/// Integrals run at a relative tolerance well below the check's.
pub fn sum_to_one(net: &Network) -> Result<Check> {
    let net = net.clone().with_quadrature(QuadratureSpec::adaptive(1e-11, 1e-15));
    let a = crate::association::assoc_all(&net)?;
    let a_t = assoc_tbs_direct(&net)?;
    Ok(Check::new("A_T + A_L + A_N", a_t + a.a_l + a.a_n, 1.0, 0.0, Tolerance::Absolute(SUM_TO_ONE_ABS)))
}

pub fn association_checks(laws: &ServingPdfs, mc: &Campaign) -> Vec<Check> {
    let a = laws.assoc();
    [(TierLabel::Tbs, "A_T", a.a_t), (TierLabel::LosAbs, "A_L", a.a_l), (TierLabel::NlosAbs, "A_N", a.a_n)]
        .into_iter()
        .map(|(tier, name, value)| {
            Check::against(name, value, mc.association(tier), Tolerance::StdErrors(ASSOCIATION_SE))
        })
        .collect()
}

pub fn coverage_tbs_checks(laws: &ServingPdfs, mc: &Campaign, nu_db: &[f64]) -> Result<Vec<Check>> {
    nu_db
        .iter()
        .map(|&nu| {
            let value = coverage_tbs(laws, db(nu), CoverageMethod::Alzer)?.value;
            Ok(Check::against(
                format!("P_T_C nu={nu}dB"),
                value,
                mc.coverage_tbs(db(nu)),
                Tolerance::Absolute(COVERAGE_ABS),
            ))
        })
        .collect()
}

/// NOMA coverage with `eps_f = eps_t`, for every SIC residue in `betas`.
pub fn coverage_noma_checks(net: &Network, mc: &Campaign, eps_db: &[f64], betas: &[f64]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &beta in betas {
        let mut params = net.params.clone();
        params.beta = beta;
        let laws = ServingPdfs::new(&Network::new(params)?.with_quadrature(net.quad))?;
        let sim = mc.with_beta(beta);
        for &eps in eps_db {
            let value = coverage_noma_tier(&laws, &NomaThresholds::from_db(eps, eps))?.value;
            out.push(Check::against(
                format!("P_A_C eps={eps}dB beta={beta} h={}", net.params.h),
                value,
                sim.coverage_noma(db(eps), db(eps)),
                Tolerance::Absolute(COVERAGE_ABS),
            ));
        }
    }
    Ok(out)
}

pub fn rate_checks(laws: &ServingPdfs, mc: &Campaign) -> Result<Vec<Check>> {
    Ok(vec![
        Check::against("R_T", rate_tbs(laws)?.value, mc.rate_tbs(), Tolerance::Relative(RATE_TBS_REL)),
        Check::against("R_A", rate_noma_tier(laws)?.value, mc.rate_noma(), Tolerance::Relative(RATE_ABS_REL)),
    ])
}

/// `count` log-spaced values between `lo` and `hi`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let step = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (step * i as f64).exp()).collect()
}

/// Transform arguments spanning the body of an interference sample:
/// `0.1 / median` to `3 / median`.
fn laplace_arguments(samples: &[f64], count: usize) -> Vec<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2].max(f64::MIN_POSITIVE);
    log_spaced(0.1 / median, 3.0 / median, count)
}

/// Analytical Laplace transforms against empirical ones over `draws`
/// interference fields, for a TBS server and a LoS ABS server.
pub fn laplace_checks(net: &Network, draws: usize, seed: u64, count: usize) -> Result<Vec<Check>> {
    let sampler = Sampler::new(net);
    let mut out = Vec::new();

    let r0 = LAPLACE_TBS_DISTANCE.min(net.params.r_b);
    let tbs = interference_draws(draws, seed, |rng| sampler.sample_tbs_interference(r0, rng));
    for s in laplace_arguments(&tbs, count) {
        out.push(Check::against(
            format!("L_T s={s:.3e}"),
            laplace_tbs(net, s, r0)?,
            empirical_laplace(&tbs, s),
            Tolerance::Relative(LAPLACE_REL),
        ));
    }

    let ctx = LaplaceContext::for_serving(net, TierLabel::LosAbs, LAPLACE_ABS_DISTANCE.max(net.params.h))?;
    let abs = interference_draws(draws, seed.wrapping_add(1), |rng| sampler.sample_abs_interference(&ctx, rng));
    for s in laplace_arguments(&abs, count) {
        out.push(Check::against(
            format!("L_A s={s:.3e}"),
            laplace_abs(net, s, &ctx)?,
            empirical_laplace(&abs, s),
            Tolerance::Relative(LAPLACE_REL),
        ));
    }
    Ok(out)
}

/// Closed-form TBS Laplace transform against adaptive quadrature at
/// `count` arguments.
pub fn laplace_closed_form_checks(net: &Network, r0: f64, count: usize) -> Result<Vec<Check>> {
    let spec = QuadratureSpec::adaptive(1e-12, 0.0);
    let mean_gain = net.derived.p_main * net.derived.g_main + (1.0 - net.derived.p_main) * net.derived.g_side;
    let scale = net.derived.p_t * net.derived.c_t * mean_gain * r0.powf(-net.params.alpha_t);
    log_spaced(0.1 / scale, 10.0 / scale, count)
        .into_iter()
        .map(|s| {
            Ok(Check::new(
                format!("L_T closed form m_T={} s={s:.3e}", net.params.m_t),
                laplace_tbs_closed_form(net, s, r0)?,
                crate::laplace::laplace_tbs_with(net, s, r0, &spec)?,
                0.0,
                Tolerance::Relative(LAPLACE_CLOSED_FORM_REL),
            ))
        })
        .collect()
}

/// Association, coverage and rate checks of one scenario.
pub fn cross_engine(net: &Network, mc: &Campaign, probes: &Probes) -> Result<Vec<Check>> {
    let laws = ServingPdfs::new(net)?;
    let mut out = association_checks(&laws, mc);
    out.extend(coverage_tbs_checks(&laws, mc, &probes.nu_db)?);
    out.extend(coverage_noma_checks(net, mc, &probes.eps_db, &probes.betas)?);
    out.extend(rate_checks(&laws, mc)?);
    Ok(out)
}
