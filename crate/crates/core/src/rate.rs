//! Ergodic rates in bits/s/Hz.
//!
//! `E[log2(1 + SINR)] = (1/ln 2) int_0^inf P(SINR > z) / (1 + z) dz` is
//! evaluated in `t = ln(1 + y)`, where `y` is the full-power SINR the link
//! must reach for the message SINR to exceed `z`. For the NOMA messages
//! this removes the finite upper limits `a_m / a_n` and `a_n / (beta a_m)`
//! and turns the integrand into a smooth, exponentially decaying function
//! of `t` that is cut where it falls below [`CCDF_CUTOFF`].

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::coverage::{abs_link_ccdf, tbs_link_ccdf, NomaCase};
use crate::distances::{ServingPdfs, TierLabel};
use crate::error::{ModelError, Result};
use crate::laplace::LaplaceContext;
use crate::network::Network;
use crate::numerics::{integrate_breakpoints, QuadratureSpec};

/// Integrand level at which the `t` integral is truncated.
pub const CCDF_CUTOFF: f64 = 1e-11;
const T_MAX: f64 = 120.0;

/// Three nested integrals make the default tolerances needlessly costly;
/// these keep the rates accurate to about 1e-6 relative.
fn rate_specs() -> (QuadratureSpec, QuadratureSpec, QuadratureSpec) {
    (
        QuadratureSpec::adaptive(1e-6, 1e-12),
        QuadratureSpec::adaptive(1e-7, 1e-13),
        QuadratureSpec::adaptive(1e-8, 1e-14),
    )
}

/// A rate and an estimate of the truncated tail, both in bits/s/Hz.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub value: f64,
    pub tail: f64,
}

/// Which message the integrand belongs to: the high-power one decoded
/// against the low-power residue, or the low-power one decoded after SIC.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Message {
    Strong,
    Weak,
}

/// `dz / (1 + z)` expressed in `y`, times `dy/dt = 1 + y`.
fn message_weight(net: &Network, msg: Message, y: f64) -> f64 {
    let p = &net.params;
    let (a_m, a_n, beta) = (p.a_m, p.a_n, p.beta);
    let jac = 1.0 + y;
    match msg {
        Message::Strong => a_m * jac / ((1.0 + a_n * y) * (1.0 + (a_m + a_n) * y)),
        Message::Weak => a_n * jac / ((1.0 + beta * a_m * y) * (1.0 + (beta * a_m + a_n) * y)),
    }
}

/// `(1 / ln 2) int_0^inf g(t) dt` for a non-negative `g` that eventually
/// decays, truncated once `g` drops below the cutoff.
fn log_rate_integral<G>(spec: &QuadratureSpec, mut g: G) -> Result<RateResult>
where
    G: FnMut(f64) -> Result<f64>,
{
    let mut pts = vec![0.0, 0.25, 0.5, 1.0];
    let mut prev = g(1.0)?;
    let mut t = 1.0;
    let mut last = prev;
    while t < T_MAX {
        let next = t * 1.5;
        last = g(next)?;
        pts.push(next);
        if last < CCDF_CUTOFF && last <= prev {
            t = next;
            break;
        }
        prev = last;
        t = next;
    }
    let value = integrate_breakpoints(&mut g, &pts, spec)?;
    // exponential extrapolation from the last two probes
    let width = t - t / 1.5;
    let tail = if last > 0.0 && prev > last { last * width / (prev / last).ln() } else { last * width };
    Ok(RateResult { value: value / LN_2, tail: tail / LN_2 })
}

/// Ergodic rate of a TBS-associated UE.
pub fn rate_tbs(laws: &ServingPdfs) -> Result<RateResult> {
    let net = laws.network();
    if laws.assoc().a_t <= 0.0 {
        return Err(ModelError::UndefinedTier(TierLabel::Tbs));
    }
    let r_b = net.params.r_b;
    let (outer, middle, inner) = rate_specs();
    log_rate_integral(&outer, |t| {
        let z = t.exp_m1();
        laws.integrate_with(TierLabel::Tbs, 0.0, r_b, &middle, |r| tbs_link_ccdf(net, r, z, false, &inner))
    })
}

/// Joint rate contribution of one NOMA case: the typical UE's own message
/// and the paired fixed UE's message, each integrated over the serving
/// distances of that case. Divide by nothing: the near and far parts of a
/// class add up to the class rate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseRate {
    pub typical: RateResult,
    pub fixed: RateResult,
}

impl CaseRate {
    /// Per-pair spectrum efficiency.
    pub fn total(&self) -> f64 {
        self.typical.value + self.fixed.value
    }

    pub fn tail(&self) -> f64 {
        self.typical.tail + self.fixed.tail
    }
}

pub fn rate_noma_case(laws: &ServingPdfs, tier: TierLabel, case: NomaCase) -> Result<CaseRate> {
    let net = laws.network();
    let p = &net.params;
    if !tier.is_abs() {
        return Err(ModelError::Inconsistent("NOMA rates need an ABS link class".into()));
    }
    let (lo, hi) = match case {
        NomaCase::Near => (p.h, p.r_f),
        NomaCase::Far => (p.r_f, net.slant(p.region_radius)),
    };
    if hi <= lo {
        return Ok(CaseRate::default());
    }
    // The near UE decodes the weak message after SIC, the far UE the strong one.
    let (typical_msg, fixed_msg) = match case {
        NomaCase::Near => (Message::Weak, Message::Strong),
        NomaCase::Far => (Message::Strong, Message::Weak),
    };
    let (outer, middle, inner) = rate_specs();
    let term = |msg: Message, fixed_ue: bool| {
        log_rate_integral(&outer, |t| {
            let y = t.exp_m1();
            let w = message_weight(net, msg, y);
            let g = laws.integrate_with(tier, lo, hi, &middle, |r| {
                let ctx = LaplaceContext::for_serving(net, tier, r)?;
                let dist = if fixed_ue { p.r_f } else { r };
                abs_link_ccdf(net, tier, &ctx, dist, y, &inner)
            })?;
            Ok(w * g)
        })
    };
    Ok(CaseRate { typical: term(typical_msg, false)?, fixed: term(fixed_msg, true)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NomaTierRate {
    pub los_near: CaseRate,
    pub los_far: CaseRate,
    pub nlos_near: CaseRate,
    pub nlos_far: CaseRate,
    /// `A_L / (A_L + A_N)`
    pub los_weight: f64,
    pub value: f64,
    pub tail: f64,
}

/// Per-pair spectrum efficiency of the NOMA tier, conditioned on ABS
/// association.
pub fn rate_noma_tier(laws: &ServingPdfs) -> Result<NomaTierRate> {
    let a = laws.assoc();
    if a.abs() <= 0.0 {
        return Err(ModelError::UndefinedTier(TierLabel::LosAbs));
    }
    let case = |tier: TierLabel, c: NomaCase, prob: f64| -> Result<CaseRate> {
        if prob > 0.0 {
            rate_noma_case(laws, tier, c)
        } else {
            Ok(CaseRate::default())
        }
    };
    let los_near = case(TierLabel::LosAbs, NomaCase::Near, a.a_l)?;
    let los_far = case(TierLabel::LosAbs, NomaCase::Far, a.a_l)?;
    let nlos_near = case(TierLabel::NlosAbs, NomaCase::Near, a.a_n)?;
    let nlos_far = case(TierLabel::NlosAbs, NomaCase::Far, a.a_n)?;
    let w = a.a_l / a.abs();
    let value = w * (los_near.total() + los_far.total()) + (1.0 - w) * (nlos_near.total() + nlos_far.total());
    let tail = w * (los_near.tail() + los_far.tail()) + (1.0 - w) * (nlos_near.tail() + nlos_far.tail());
    Ok(NomaTierRate { los_near, los_far, nlos_near, nlos_far, los_weight: w, value, tail })
}
