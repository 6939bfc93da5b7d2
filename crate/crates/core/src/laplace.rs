//! Laplace transforms of the aggregate interference in each tier.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channel::inv_pow;
use crate::distances::{tau_los_given_nlos, tau_nlos_given_los, TierLabel};
use crate::error::{ModelError, Result};
use crate::network::Network;
use crate::numerics::{beta_segment, binomial, integrate_breakpoints, QuadratureSpec};

/// Interference-field bounds seen by a UE served at distance `r`.
///
/// ABS service: horizontal integration ranges of the LoS and NLoS
/// interferers. TBS service: the radial annulus `[r, R_B]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceContext {
    pub serving: TierLabel,
    pub r: f64,
    pub los_lower: f64,
    pub los_upper: f64,
    pub nlos_lower: f64,
    pub nlos_upper: f64,
}

impl LaplaceContext {
    /// Bounds for service by `serving` at distance `r`. For LoS service the
    /// NLoS bound does not depend on whether a TBS sits in the ball.
    pub fn for_serving(net: &Network, serving: TierLabel, r: f64) -> Result<Self> {
        let p = &net.params;
        let far = p.region_radius;
        match serving {
            TierLabel::Tbs => {
                if !(0.0..=p.r_b).contains(&r) {
                    return Err(ModelError::Domain { what: "TBS interference annulus", r, condition: "0 <= r <= R_B" });
                }
                Ok(Self { serving, r, los_lower: r, los_upper: p.r_b, nlos_lower: r, nlos_upper: p.r_b })
            }
            TierLabel::LosAbs | TierLabel::NlosAbs => {
                if r < p.h {
                    return Err(ModelError::Domain { what: "ABS interference bounds", r, condition: "r >= h" });
                }
                let own = net.horizontal(r);
                let (los_lower, nlos_lower) = if serving == TierLabel::LosAbs {
                    (own, net.horizontal(tau_nlos_given_los(net, r)))
                } else {
                    (net.horizontal(tau_los_given_nlos(net, r)), own)
                };
                Ok(Self {
                    serving,
                    r,
                    los_lower: los_lower.min(far),
                    los_upper: far,
                    nlos_lower: nlos_lower.min(far),
                    nlos_upper: far,
                })
            }
        }
    }
}

/// `1 - (1 + c)^(-m)`, accurate for small `c`.
#[inline]
fn nakagami_pgfl_term(c: f64, m: u32) -> f64 {
    if m == 1 {
        c / (1.0 + c)
    } else {
        -(-(m as f64) * c.ln_1p()).exp_m1()
    }
}

fn geometric_breaks(lo: f64, hi: f64, knee: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut x = lo.max(knee / 64.0).max(1.0);
    while x < hi {
        if x > lo {
            pts.push(x);
        }
        x *= 4.0;
    }
    pts.push(hi);
    pts
}

/// `E[exp(-s I_T)]` for a TBS-served UE at distance `r0`, interferers in
/// `[r0, R_B]` with random beam gains, by direct quadrature.
pub fn laplace_tbs(net: &Network, s: f64, r0: f64) -> Result<f64> {
    laplace_tbs_with(net, s, r0, &net.inner_quad())
}

pub fn laplace_tbs_with(net: &Network, s: f64, r0: f64, spec: &QuadratureSpec) -> Result<f64> {
    let (p, d) = (&net.params, &net.derived);
    if !(0.0..=p.r_b).contains(&r0) {
        return Err(ModelError::Domain { what: "TBS interference annulus", r: r0, condition: "0 <= r <= R_B" });
    }
    if s < 0.0 || !s.is_finite() {
        return Err(ModelError::Inconsistent(format!("Laplace argument s = {s} must be finite and non-negative")));
    }
    if s == 0.0 || r0 >= p.r_b {
        return Ok(1.0);
    }
    let m = p.m_t;
    let mut exponent = 0.0;
    for (gain, prob) in [(d.g_main, d.p_main), (d.g_side, d.p_side)] {
        if prob == 0.0 || gain == 0.0 {
            continue;
        }
        let scale = s * d.p_t * d.c_t * gain / m as f64;
        let knee = scale.powf(1.0 / p.alpha_t);
        let pts = geometric_breaks(r0, p.r_b, knee);
        let integral = integrate_breakpoints(
            |r| Ok::<f64, ModelError>(nakagami_pgfl_term(scale * inv_pow(r, p.alpha_t), m) * r),
            &pts,
            spec,
        )?;
        exponent += prob * integral;
    }
    Ok((-2.0 * PI * p.lambda_t * exponent).exp())
}

/// Incomplete-beta closed form of [`laplace_tbs`]. Needs `2 / alpha_T`
/// integral (so every sign factor is real) and `r0 > 0`.
pub fn laplace_tbs_closed_form(net: &Network, s: f64, r0: f64) -> Result<f64> {
    let (p, d) = (&net.params, &net.derived);
    let delta = 2.0 / p.alpha_t;
    if (delta - delta.round()).abs() > 1e-12 {
        return Err(ModelError::ClosedFormUnavailable(format!(
            "2/alpha_T = {delta} is not an integer, so (-1)^(2/alpha_T - i + 1) is not real"
        )));
    }
    if r0 <= 0.0 || r0 > p.r_b {
        return Err(ModelError::ClosedFormUnavailable(format!("needs 0 < r0 <= R_B, got {r0}")));
    }
    if s == 0.0 || r0 == p.r_b {
        return Ok(1.0);
    }
    let delta_i = delta.round() as i32;
    let m = p.m_t;
    let mut sum = 0.0;
    for (gain, prob) in [(d.g_main, d.p_main), (d.g_side, d.p_side)] {
        if prob == 0.0 || gain == 0.0 {
            continue;
        }
        let c = s * d.p_t * d.c_t * gain / m as f64;
        // lower limit at the serving distance, upper at the ball edge
        let t_l = -c / r0.powf(p.alpha_t);
        let t_u = -c / p.r_b.powf(p.alpha_t);
        for i in 1..=m {
            let sign = if (delta_i - i as i32 + 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let segment = beta_segment(t_l, t_u, i as f64 - delta, 1.0 - m as f64)?;
            sum += prob * binomial(m, i) * c.powf(delta) * sign * segment;
        }
    }
    Ok((-2.0 * PI * p.lambda_t / p.alpha_t * sum).exp())
}

/// `E[exp(-s (I_L + I_N))]` for an ABS-served UE, by direct quadrature
/// over the non-homogeneous LoS/NLoS interferer densities.
pub fn laplace_abs(net: &Network, s: f64, ctx: &LaplaceContext) -> Result<f64> {
    laplace_abs_with(net, s, ctx, &net.inner_quad())
}

pub fn laplace_abs_with(net: &Network, s: f64, ctx: &LaplaceContext, spec: &QuadratureSpec) -> Result<f64> {
    if s < 0.0 || !s.is_finite() {
        return Err(ModelError::Inconsistent(format!("Laplace argument s = {s} must be finite and non-negative")));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let (p, d) = (&net.params, &net.derived);
    let h2 = p.h * p.h;
    let curve = *net.scurve();
    let mut exponent = 0.0;
    for (los, lo, hi) in [(true, ctx.los_lower, ctx.los_upper), (false, ctx.nlos_lower, ctx.nlos_upper)] {
        if hi <= lo {
            continue;
        }
        let (c, alpha, m) = if los { (d.c_l, p.alpha_l, p.m_l) } else { (d.c_n, p.alpha_n, p.m_n) };
        let scale = s * d.p_a * c / m as f64;
        let knee = scale.powf(1.0 / alpha);
        let knee_x = (knee * knee - h2).max(0.0).sqrt();
        let pts = geometric_breaks(lo, hi, knee_x.max(p.h));
        let integral = integrate_breakpoints(
            |x| {
                let dist = (x * x + h2).sqrt();
                let prob = if los { curve.p_los(x) } else { curve.p_nlos(x) };
                Ok::<f64, ModelError>(nakagami_pgfl_term(scale * inv_pow(dist, alpha), m) * prob * x)
            },
            &pts,
            spec,
        )?;
        exponent += integral;
    }
    Ok((-2.0 * PI * p.lambda_a * exponent).exp())
}
