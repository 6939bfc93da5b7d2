//! Association probabilities of the three link classes.
//!
//! The UE picks the largest biased average power among the nearest TBS
//! (only if inside the LoS ball), LoS ABS and NLoS ABS, except that a NLoS
//! ABS is never chosen while a TBS is inside the ball.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::distances::{abs_breaks, tau_los_given_nlos, tau_nlos_given_los, tau_tbs_given_los};
use crate::error::{ModelError, Result};
use crate::network::Network;
use crate::numerics::integrate_breakpoints;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssociationProbs {
    pub a_t: f64,
    pub a_l: f64,
    pub a_n: f64,
    /// LoS association with no TBS in the ball.
    pub a_l1: f64,
    /// LoS association with a TBS in the ball.
    pub a_l2: f64,
    pub q_t: f64,
    /// Probability of a LoS ABS within `l_LT`.
    pub q_l: f64,
    /// Probability the LoS ABS within `l_LT` also beats every NLoS ABS.
    pub p_al2_nlos: f64,
    /// Normalized probability the LoS ABS within `l_LT` beats the TBS.
    pub p_al2_tbs: f64,
    /// `Q_T Q_L P(A_L2^N) P(A_L2^T)`; equals `a_l2` when the NLoS and TBS
    /// competitions decouple, i.e. when `l_Lh >= l_LT`.
    pub a_l2_factorized: f64,
}

impl AssociationProbs {
    pub fn abs(&self) -> f64 {
        self.a_l + self.a_n
    }
}

fn los_base(net: &Network, x: f64) -> f64 {
    2.0 * PI * net.params.lambda_a * x * net.scurve().p_los(x) * net.void_los(x)
}

fn nlos_void_given_los(net: &Network, x: f64) -> f64 {
    net.void_nlos(net.horizontal(tau_nlos_given_los(net, net.slant(x))))
}

fn tbs_beaten(net: &Network, x: f64) -> f64 {
    let tau = tau_tbs_given_los(net, net.slant(x)).min(net.params.r_b);
    (net.void_tbs(tau) - (1.0 - net.derived.q_t)).max(0.0)
}

fn breaks(net: &Network, lo: f64, hi: f64) -> Vec<f64> {
    let d = &net.derived;
    let h = net.params.h;
    let extra = [net.horizontal(d.l_lh.max(h)), net.horizontal(d.l_lt.max(h))];
    abs_breaks(net, lo, hi, &extra)
}

/// Probability of association with a NLoS ABS.
pub fn assoc_nlos(net: &Network) -> Result<f64> {
    let p = &net.params;
    let lam = 2.0 * PI * p.lambda_a;
    let pts = breaks(net, 0.0, p.region_radius);
    let integral = integrate_breakpoints(
        |x| {
            let r = net.slant(x);
            let los_void = net.void_los(net.horizontal(tau_los_given_nlos(net, r)));
            Ok::<f64, ModelError>(lam * x * net.scurve().p_nlos(x) * net.void_nlos(x) * los_void)
        },
        &pts,
        &net.quad,
    )?;
    Ok((1.0 - net.derived.q_t) * integral)
}

/// LoS association and its components:
/// `(A_L, A_L1, A_L2, Q_L, P(A_L2^N), P(A_L2^T), factorized A_L2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosAssociation {
    pub a_l: f64,
    pub a_l1: f64,
    pub a_l2: f64,
    pub q_l: f64,
    pub p_al2_nlos: f64,
    pub p_al2_tbs: f64,
    pub a_l2_factorized: f64,
}

pub fn assoc_los(net: &Network) -> Result<LosAssociation> {
    let (p, d) = (&net.params, &net.derived);
    let quad = net.quad;
    let all = breaks(net, 0.0, p.region_radius);
    let wins_nlos =
        integrate_breakpoints(|x| Ok::<f64, ModelError>(los_base(net, x) * nlos_void_given_los(net, x)), &all, &quad)?;
    let a_l1 = (1.0 - d.q_t) * wins_nlos;

    let (a_l2, q_l, p_n, p_t) = if d.l_lt > p.h {
        let x_lt = net.horizontal(d.l_lt);
        let inner = breaks(net, 0.0, x_lt);
        let joint = integrate_breakpoints(
            |x| Ok::<f64, ModelError>(los_base(net, x) * nlos_void_given_los(net, x) * tbs_beaten(net, x)),
            &inner,
            &quad,
        )?;
        let q_l = 1.0 - net.void_los(x_lt);
        let p_n = if d.l_lh > d.l_lt {
            1.0
        } else {
            integrate_breakpoints(
                |x| Ok::<f64, ModelError>(los_base(net, x) * nlos_void_given_los(net, x)),
                &inner,
                &quad,
            )? / q_l
        };
        let beats_tbs =
            integrate_breakpoints(|x| Ok::<f64, ModelError>(los_base(net, x) * tbs_beaten(net, x)), &inner, &quad)?;
        (joint, q_l, p_n, beats_tbs / (q_l * d.q_t))
    } else {
        (0.0, 0.0, 0.0, 0.0)
    };
    Ok(LosAssociation {
        a_l: a_l1 + a_l2,
        a_l1,
        a_l2,
        q_l,
        p_al2_nlos: p_n,
        p_al2_tbs: p_t,
        a_l2_factorized: d.q_t * q_l * p_n * p_t,
    })
}

pub fn assoc_all(net: &Network) -> Result<AssociationProbs> {
    let a_n = assoc_nlos(net)?;
    let los = assoc_los(net)?;
    let abs = a_n + los.a_l;
    if abs > 1.0 + 1e-9 {
        return Err(ModelError::Inconsistent(format!("A_L + A_N = {abs} exceeds 1")));
    }
    Ok(AssociationProbs {
        a_t: (1.0 - abs).max(0.0),
        a_l: los.a_l,
        a_n,
        a_l1: los.a_l1,
        a_l2: los.a_l2,
        q_t: net.derived.q_t,
        q_l: los.q_l,
        p_al2_nlos: los.p_al2_nlos,
        p_al2_tbs: los.p_al2_tbs,
        a_l2_factorized: los.a_l2_factorized,
    })
}

/// Direct evaluation of the TBS association probability,
/// `int_0^R_B f_T(r) (1 - P(a LoS ABS outshines it)) dr`, for checking the
/// complement.
pub fn assoc_tbs_direct(net: &Network) -> Result<f64> {
    let laws = crate::distances::ServingPdfs::new(net)?;
    let mass = laws.conditional(crate::distances::TierLabel::Tbs, None).mass()?;
    Ok(mass * laws.assoc().a_t)
}
