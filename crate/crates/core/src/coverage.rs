//! Coverage probabilities of the mmWave tier and the NOMA tier.
//!
//! Every link CCDF `P(H > x)` of a Nakagami gain with integer shape `m`
//! uses the Alzer bound `1 - (1 - e^{-b x})^m`, exact for `m = 1`, so that
//! each conditional coverage is a finite sum of Laplace transforms.

use serde::{Deserialize, Serialize};

use crate::channel::inv_pow;
use crate::distances::{ServingPdfs, TierLabel};
use crate::error::{ModelError, Result};
use crate::laplace::{laplace_abs_with, laplace_tbs_with, LaplaceContext};
use crate::network::Network;
use crate::numerics::{binomial, gauss_chebyshev_nodes, map_node, QuadratureSpec};
use crate::params::db_to_linear;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageMethod {
    Alzer,
    GaussChebyshev,
    ExactM1,
}

impl CoverageMethod {
    pub fn name(self) -> &'static str {
        match self {
            CoverageMethod::Alzer => "alzer",
            CoverageMethod::GaussChebyshev => "gauss_chebyshev",
            CoverageMethod::ExactM1 => "exact_m1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub value: f64,
    pub method: CoverageMethod,
    pub feasible: bool,
}

impl CoverageResult {
    fn infeasible(method: CoverageMethod) -> Self {
        Self { value: 0.0, method, feasible: false }
    }

    fn of(value: f64, method: CoverageMethod) -> Self {
        Self { value: value.clamp(0.0, 1.0), method, feasible: true }
    }
}

/// Whether the typical UE is closer to its ABS than the paired fixed UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NomaCase {
    Near,
    Far,
}

impl NomaCase {
    pub fn of_distance(r: f64, r_f: f64) -> Self {
        if r <= r_f {
            NomaCase::Near
        } else {
            NomaCase::Far
        }
    }
}

/// Target SINRs (linear) of the fixed and the typical UE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NomaThresholds {
    pub eps_f: f64,
    pub eps_t: f64,
}

impl NomaThresholds {
    pub fn new(eps_f: f64, eps_t: f64) -> Self {
        Self { eps_f, eps_t }
    }

    pub fn from_db(eps_f_db: f64, eps_t_db: f64) -> Self {
        Self::new(db_to_linear(eps_f_db), db_to_linear(eps_t_db))
    }

    /// Signal-to-(interference plus noise) ratio the near UE needs on its
    /// full-power link to decode both messages; `None` when some stage can
    /// never succeed.
    pub fn near_factor(&self, a_m: f64, a_n: f64, beta: f64) -> Option<f64> {
        let first = a_m - a_n * self.eps_f;
        let second = a_n - beta * a_m * self.eps_t;
        if first <= 0.0 || second <= 0.0 {
            return None;
        }
        Some((self.eps_f / first).max(self.eps_t / second))
    }

    /// Same for the far UE, which decodes only its own message.
    pub fn far_factor(&self, a_m: f64, a_n: f64) -> Option<f64> {
        let denom = a_m - a_n * self.eps_t;
        (denom > 0.0).then(|| self.eps_t / denom)
    }

    pub fn factor(&self, net: &Network, case: NomaCase) -> Option<f64> {
        let p = &net.params;
        match case {
            NomaCase::Near => self.near_factor(p.a_m, p.a_n, p.beta),
            NomaCase::Far => self.far_factor(p.a_m, p.a_n),
        }
    }
}

/// `sum_k (-1)^(k+1) C(m,k) e^{-k b theta noise} L(k b theta)`.
pub(crate) fn alzer_ccdf<L>(m: u32, b: f64, theta: f64, noise: f64, mut laplace: L) -> Result<f64>
where
    L: FnMut(f64) -> Result<f64>,
{
    if theta <= 0.0 {
        return Ok(1.0);
    }
    let mut total = 0.0;
    for k in 1..=m {
        let s = k as f64 * b * theta;
        let term = binomial(m, k) * (-s * noise).exp() * laplace(s)?;
        total += if k % 2 == 1 { term } else { -term };
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Fading shape, Alzer constant, loss gain and exponent of an ABS link class.
pub(crate) fn abs_link(net: &Network, tier: TierLabel) -> (u32, f64, f64, f64) {
    let (p, d) = (&net.params, &net.derived);
    match tier {
        TierLabel::NlosAbs => (p.m_n, d.b_n, d.c_n, p.alpha_n),
        _ => (p.m_l, d.b_l, d.c_l, p.alpha_l),
    }
}

/// `P(P_A C dist^{-alpha} H > factor (I + noise))` on a link of class
/// `tier`, with the interference field described by `ctx`.
pub(crate) fn abs_link_ccdf(
    net: &Network,
    tier: TierLabel,
    ctx: &LaplaceContext,
    dist: f64,
    factor: f64,
    inner: &QuadratureSpec,
) -> Result<f64> {
    let (m, b, c, alpha) = abs_link(net, tier);
    let theta = factor / (inv_pow(dist, alpha) * net.derived.p_a * c);
    alzer_ccdf(m, b, theta, net.derived.sigma2_a, |s| laplace_abs_with(net, s, ctx, inner))
}

/// `P(SINR_T > nu)` for a TBS-served UE at distance `r`.
pub(crate) fn tbs_link_ccdf(net: &Network, r: f64, nu: f64, exact: bool, inner: &QuadratureSpec) -> Result<f64> {
    let (p, d) = (&net.params, &net.derived);
    let theta = nu / (inv_pow(r, p.alpha_t) * d.eta_t);
    let (m, b) = if exact { (1, 1.0) } else { (p.m_t, d.b_t) };
    alzer_ccdf(m, b, theta, d.sigma2_t, |s| laplace_tbs_with(net, s, r, inner))
}

/// Coverage of the mmWave tier, conditioned on TBS association. The
/// Gauss-Chebyshev variant uses `net.quad.nodes` nodes on each of
/// `[0, l_TL]` and `[l_TL, R_B]`.
pub fn coverage_tbs(laws: &ServingPdfs, nu_t: f64, method: CoverageMethod) -> Result<CoverageResult> {
    let net = laws.network();
    let p = &net.params;
    if !(nu_t > 0.0) {
        return Err(ModelError::Inconsistent(format!("SINR threshold {nu_t} must be positive")));
    }
    if laws.assoc().a_t <= 0.0 {
        return Err(ModelError::UndefinedTier(TierLabel::Tbs));
    }
    let exact = match method {
        CoverageMethod::ExactM1 if p.m_t != 1 => {
            return Err(ModelError::UnsupportedRegime(format!("the exact coverage form needs m_T = 1, got {}", p.m_t)))
        }
        CoverageMethod::ExactM1 => true,
        _ => false,
    };
    let inner = net.inner_quad();
    let value = match method {
        CoverageMethod::GaussChebyshev => {
            let l_tl = net.derived.l_tl;
            let segments: Vec<(f64, f64)> =
                if l_tl > 0.0 && l_tl < p.r_b { vec![(0.0, l_tl), (l_tl, p.r_b)] } else { vec![(0.0, p.r_b)] };
            let nodes = gauss_chebyshev_nodes(net.quad.nodes);
            let mut sum = 0.0;
            for (lo, hi) in segments {
                let mut part = 0.0;
                for node in &nodes {
                    let r = map_node(node.node, lo, hi);
                    let g = laws.density(TierLabel::Tbs, None, r) * tbs_link_ccdf(net, r, nu_t, false, &inner)?;
                    part += node.weight * node.factor * g;
                }
                sum += 0.5 * (hi - lo) * part;
            }
            sum
        }
        _ => laws.integrate(TierLabel::Tbs, 0.0, p.r_b, |r| tbs_link_ccdf(net, r, nu_t, exact, &inner))?,
    };
    Ok(CoverageResult::of(value, method))
}

/// Coverage of the typical UE served by an ABS of class `tier` at slant
/// distance `r` in the given NOMA case.
pub fn coverage_noma_conditional(
    net: &Network,
    tier: TierLabel,
    case: NomaCase,
    r: f64,
    thr: &NomaThresholds,
) -> Result<CoverageResult> {
    let p = &net.params;
    if !tier.is_abs() {
        return Err(ModelError::Inconsistent("NOMA coverage needs an ABS link class".into()));
    }
    match case {
        NomaCase::Near if r > p.r_f || r < p.h => {
            return Err(ModelError::Domain { what: "near-UE coverage", r, condition: "h <= r <= R_f" })
        }
        NomaCase::Far if r <= p.r_f || r < p.h => {
            return Err(ModelError::Domain { what: "far-UE coverage", r, condition: "r > R_f and r >= h" })
        }
        _ => {}
    }
    let Some(factor) = thr.factor(net, case) else {
        return Ok(CoverageResult::infeasible(CoverageMethod::Alzer));
    };
    let ctx = LaplaceContext::for_serving(net, tier, r)?;
    let value = abs_link_ccdf(net, tier, &ctx, r, factor, &net.inner_quad())?;
    Ok(CoverageResult::of(value, CoverageMethod::Alzer))
}

/// Coverage of one ABS link class conditioned on association with it,
/// split into the joint near and far contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassCoverage {
    pub near: f64,
    pub far: f64,
    pub near_feasible: bool,
    pub far_feasible: bool,
}

impl ClassCoverage {
    pub fn total(&self) -> f64 {
        (self.near + self.far).clamp(0.0, 1.0)
    }
}

pub fn coverage_noma_class(laws: &ServingPdfs, tier: TierLabel, thr: &NomaThresholds) -> Result<ClassCoverage> {
    let net = laws.network();
    let p = &net.params;
    let near_factor = thr.factor(net, NomaCase::Near);
    let far_factor = thr.factor(net, NomaCase::Far);
    let inner = net.inner_quad();
    let part = |lo: f64, hi: f64, factor: Option<f64>| -> Result<f64> {
        match factor {
            None => Ok(0.0),
            Some(f) => laws.integrate(tier, lo, hi, |r| {
                let ctx = LaplaceContext::for_serving(net, tier, r)?;
                abs_link_ccdf(net, tier, &ctx, r, f, &inner)
            }),
        }
    };
    let far_edge = net.slant(p.region_radius);
    Ok(ClassCoverage {
        near: part(p.h, p.r_f, near_factor)?,
        far: part(p.r_f, far_edge, far_factor)?,
        near_feasible: near_factor.is_some(),
        far_feasible: far_factor.is_some(),
    })
}

/// Per-class parts of the NOMA-tier coverage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NomaTierCoverage {
    pub los: ClassCoverage,
    pub nlos: ClassCoverage,
    /// `A_L / (A_L + A_N)`
    pub los_weight: f64,
    pub result: CoverageResult,
}

pub fn coverage_noma_tier_parts(laws: &ServingPdfs, thr: &NomaThresholds) -> Result<NomaTierCoverage> {
    let a = laws.assoc();
    let abs = a.abs();
    if abs <= 0.0 {
        return Err(ModelError::UndefinedTier(TierLabel::LosAbs));
    }
    let los = if a.a_l > 0.0 {
        coverage_noma_class(laws, TierLabel::LosAbs, thr)?
    } else {
        ClassCoverage { near: 0.0, far: 0.0, near_feasible: true, far_feasible: true }
    };
    let nlos = if a.a_n > 0.0 {
        coverage_noma_class(laws, TierLabel::NlosAbs, thr)?
    } else {
        ClassCoverage { near: 0.0, far: 0.0, near_feasible: true, far_feasible: true }
    };
    let w = a.a_l / abs;
    let value = w * los.total() + (1.0 - w) * nlos.total();
    let feasible = los.near_feasible || los.far_feasible;
    let result = if feasible {
        CoverageResult::of(value, CoverageMethod::Alzer)
    } else {
        CoverageResult::infeasible(CoverageMethod::Alzer)
    };
    Ok(NomaTierCoverage { los, nlos, los_weight: w, result })
}

/// NOMA-tier coverage conditioned on ABS association.
pub fn coverage_noma_tier(laws: &ServingPdfs, thr: &NomaThresholds) -> Result<CoverageResult> {
    Ok(coverage_noma_tier_parts(laws, thr)?.result)
}
