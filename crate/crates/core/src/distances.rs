//! Nearest-BS distance laws, exclusion radii of the strongest interferers
//! and serving-distance densities conditioned on the association outcome.
//!
//! ABS distances are slant ranges (`r >= h`), TBS distances are
//! horizontal. Integrals against ABS densities are carried out in the
//! horizontal coordinate `x = sqrt(r^2 - h^2)`, where
//! `f(r) dr = 2 pi lambda_A x P(x) V(x) dx` has no endpoint singularity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::association::{assoc_all, AssociationProbs};
use crate::error::{ModelError, Result};
use crate::network::Network;
use crate::numerics::{integrate_breakpoints, CumulativeIntegral, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TierLabel {
    Tbs,
    LosAbs,
    NlosAbs,
}

impl TierLabel {
    pub const ALL: [TierLabel; 3] = [TierLabel::Tbs, TierLabel::LosAbs, TierLabel::NlosAbs];

    pub fn name(self) -> &'static str {
        match self {
            TierLabel::Tbs => "TBS",
            TierLabel::LosAbs => "LOS_ABS",
            TierLabel::NlosAbs => "NLOS_ABS",
        }
    }

    pub fn is_abs(self) -> bool {
        !matches!(self, TierLabel::Tbs)
    }
}

/// Whether a TBS lies inside the LoS ball; splits the LoS serving law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    NoTbsInBall,
    TbsInBall,
}

/// Ordering of the ball radius against the TBS/ABS break-even distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TbsRegime {
    /// `R_B <= l_TL <= l_TN`: no ABS can compete with an in-ball TBS.
    BallInsideLos,
    /// `l_TL <= R_B <= l_TN`: only LoS ABSs compete.
    Typical,
    /// `l_TL <= l_TN <= R_B`: both ABS classes may compete.
    BallBeyondNlos,
    /// `l_TN < l_TL`: NLoS ABSs are stronger than LoS ones at `h`.
    Unordered,
}

pub fn tbs_regime(net: &Network) -> TbsRegime {
    let d = &net.derived;
    let r_b = net.params.r_b;
    if d.l_tn < d.l_tl {
        TbsRegime::Unordered
    } else if r_b <= d.l_tl {
        TbsRegime::BallInsideLos
    } else if r_b <= d.l_tn {
        TbsRegime::Typical
    } else {
        TbsRegime::BallBeyondNlos
    }
}

/// Nearest-BS distance density per tier, unconditioned on association.
/// The TBS density carries only the mass `Q_T` (zero beyond the ball).
pub fn pdf_nearest(net: &Network, tier: TierLabel, r: f64) -> f64 {
    let p = &net.params;
    match tier {
        TierLabel::Tbs => {
            if (0.0..=p.r_b).contains(&r) {
                2.0 * PI * p.lambda_t * r * net.void_tbs(r)
            } else {
                0.0
            }
        }
        TierLabel::LosAbs | TierLabel::NlosAbs => {
            if r < p.h {
                return 0.0;
            }
            let x = net.horizontal(r);
            r * nearest_kernel(net, tier, x)
        }
    }
}

/// `f(r) / r = f_x(x) / x` for the ABS classes.
fn nearest_kernel(net: &Network, tier: TierLabel, x: f64) -> f64 {
    let lam = 2.0 * PI * net.params.lambda_a;
    match tier {
        TierLabel::LosAbs => lam * net.scurve().p_los(x) * net.void_los(x),
        TierLabel::NlosAbs => lam * net.scurve().p_nlos(x) * net.void_nlos(x),
        TierLabel::Tbs => 0.0,
    }
}

// Exclusion radii. ABS radii are slant distances floored at h.

/// Nearest admissible LoS ABS when a NLoS ABS serves at `r`.
pub fn tau_los_given_nlos(net: &Network, r: f64) -> f64 {
    let (p, d) = (&net.params, &net.derived);
    ((d.eta_l / d.eta_n).powf(1.0 / p.alpha_l) * r.powf(p.alpha_n / p.alpha_l)).max(p.h)
}

/// Nearest admissible NLoS ABS when a LoS ABS serves at `r`.
pub fn tau_nlos_given_los(net: &Network, r: f64) -> f64 {
    let (p, d) = (&net.params, &net.derived);
    ((d.eta_n / d.eta_l).powf(1.0 / p.alpha_n) * r.powf(p.alpha_l / p.alpha_n)).max(p.h)
}

/// Nearest admissible TBS (horizontal) when a LoS ABS serves at `r`.
pub fn tau_tbs_given_los(net: &Network, r: f64) -> f64 {
    let (p, d) = (&net.params, &net.derived);
    (d.eta_t / d.eta_l).powf(1.0 / p.alpha_t) * r.powf(p.alpha_l / p.alpha_t)
}

/// Nearest admissible LoS ABS when a TBS serves at `r`.
pub fn tau_los_given_tbs(net: &Network, r: f64) -> f64 {
    let (p, d) = (&net.params, &net.derived);
    ((d.eta_l / d.eta_t).powf(1.0 / p.alpha_l) * r.powf(p.alpha_t / p.alpha_l)).max(p.h)
}

/// Nearest admissible NLoS ABS when a TBS serves at `r`.
pub fn tau_nlos_given_tbs(net: &Network, r: f64) -> f64 {
    let (p, d) = (&net.params, &net.derived);
    ((d.eta_n / d.eta_t).powf(1.0 / p.alpha_n) * r.powf(p.alpha_t / p.alpha_n)).max(p.h)
}

/// Minimum distance of the nearest `interferer`-class BS given service by
/// `serving` at distance `r`. Same-class interferers lie beyond `r`.
pub fn exclusion_radius(
    net: &Network,
    serving: TierLabel,
    interferer: TierLabel,
    r: f64,
    tbs_in_ball: bool,
) -> Result<f64> {
    use TierLabel::*;
    let p = &net.params;
    let d = &net.derived;
    let need = |ok: bool, what: &'static str, condition: &'static str| -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(ModelError::Domain { what, r, condition })
        }
    };
    match (serving, interferer) {
        (NlosAbs, LosAbs) => {
            need(r >= p.h, "LoS exclusion given NLoS service", "r >= h")?;
            need(!tbs_in_ball, "NLoS service", "no TBS inside the LoS ball")?;
            Ok(tau_los_given_nlos(net, r))
        }
        (NlosAbs, Tbs) => Err(ModelError::Domain {
            what: "TBS exclusion given NLoS service",
            r,
            condition: "no TBS inside the LoS ball",
        }),
        (LosAbs, NlosAbs) => {
            need(r >= p.h, "NLoS exclusion given LoS service", "r >= h")?;
            if tbs_in_ball {
                need(r <= d.l_lt, "NLoS exclusion given LoS service", "r <= l_LT when a TBS is in the ball")?;
            }
            Ok(tau_nlos_given_los(net, r))
        }
        (LosAbs, Tbs) => {
            need(r >= p.h && r <= d.l_lt, "TBS exclusion given LoS service", "h <= r <= l_LT")?;
            Ok(tau_tbs_given_los(net, r))
        }
        (Tbs, LosAbs) => {
            need((0.0..=p.r_b).contains(&r), "LoS exclusion given TBS service", "0 <= r <= R_B")?;
            Ok(tau_los_given_tbs(net, r))
        }
        (Tbs, NlosAbs) => {
            need((0.0..=p.r_b).contains(&r), "NLoS exclusion given TBS service", "0 <= r <= R_B")?;
            Ok(tau_nlos_given_tbs(net, r))
        }
        (Tbs, Tbs) => {
            need((0.0..=p.r_b).contains(&r), "TBS exclusion given TBS service", "0 <= r <= R_B")?;
            Ok(r)
        }
        (LosAbs, LosAbs) | (NlosAbs, NlosAbs) => {
            need(r >= p.h, "same-class exclusion", "r >= h")?;
            Ok(r)
        }
    }
}

/// Horizontal breakpoints that resolve the shape of ABS distance laws.
pub(crate) fn abs_breaks(net: &Network, lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let scale = 1.0 / (PI * net.params.lambda_a).sqrt();
    let mut pts: Vec<f64> = vec![lo, hi];
    pts.extend(extra.iter().copied());
    pts.extend([0.5, 1.0, 2.0, 4.0].iter().map(|k| k * net.params.h));
    pts.extend([0.125, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 16.0].iter().map(|k| k * scale));
    pts.retain(|v| v.is_finite() && *v >= lo && *v <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1.0));
    pts
}

/// One conditional serving-distance density.
#[derive(Debug, Clone, Copy)]
pub struct ConditionalPdf<'a> {
    pub tier: TierLabel,
    /// `None` is the sum over both LoS branches (the full LoS law).
    pub branch: Option<Branch>,
    pub support: (f64, f64),
    laws: &'a ServingPdfs,
}

impl ConditionalPdf<'_> {
    pub fn density(&self, r: f64) -> f64 {
        self.laws.density(self.tier, self.branch, r)
    }

    /// Total mass of this (sub-)density.
    pub fn mass(&self) -> Result<f64> {
        self.laws.integrate_branch(self.tier, self.branch, self.support.0, self.support.1, |_| Ok(1.0))
    }
}

/// Serving-distance laws conditioned on the association outcome, for a
/// fixed network.
#[derive(Debug, Clone)]
pub struct ServingPdfs {
    net: Network,
    assoc: AssociationProbs,
    /// `P(nearest LoS ABS within horizontal x and it beats every NLoS ABS)`.
    los_wins: Option<CumulativeIntegral>,
}

impl ServingPdfs {
    pub fn new(net: &Network) -> Result<Self> {
        let assoc = assoc_all(net)?;
        let los_wins = if net.derived.l_lt > net.params.h {
            let x_max = net.horizontal(net.derived.l_lt);
            let n = net.clone();
            let lam = 2.0 * PI * net.params.lambda_a;
            let integrand = move |x: f64| {
                let r = n.slant(x);
                let xn = n.horizontal(tau_nlos_given_los(&n, r));
                lam * x * n.scurve().p_los(x) * n.void_los(x) * n.void_nlos(xn)
            };
            let panels = 256;
            let mut breaks: Vec<f64> = (0..=panels).map(|k| x_max * k as f64 / panels as f64).collect();
            // V_N switches on at l_Lh; keep that kink on a panel edge
            let kink = net.horizontal(net.derived.l_lh.max(net.params.h));
            if kink > 0.0 && kink < x_max {
                breaks.push(kink);
                breaks.sort_by(f64::total_cmp);
            }
            Some(CumulativeIntegral::new(integrand, breaks)?)
        } else {
            None
        };
        Ok(Self { net: net.clone(), assoc, los_wins })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn assoc(&self) -> &AssociationProbs {
        &self.assoc
    }

    fn los_wins_within(&self, slant: f64) -> f64 {
        match &self.los_wins {
            Some(table) => table.eval(self.net.horizontal(slant)),
            None => 0.0,
        }
    }

    /// Support of a conditional law.
    pub fn support(&self, tier: TierLabel, branch: Option<Branch>) -> (f64, f64) {
        let p = &self.net.params;
        let far = self.net.slant(p.region_radius);
        match (tier, branch) {
            (TierLabel::Tbs, _) => (0.0, p.r_b),
            (TierLabel::LosAbs, Some(Branch::TbsInBall)) => (p.h, self.net.derived.l_lt.max(p.h)),
            _ => (p.h, far),
        }
    }

    pub fn conditional(&self, tier: TierLabel, branch: Option<Branch>) -> ConditionalPdf<'_> {
        ConditionalPdf { tier, branch, support: self.support(tier, branch), laws: self }
    }

    fn tier_prob(&self, tier: TierLabel) -> f64 {
        match tier {
            TierLabel::Tbs => self.assoc.a_t,
            TierLabel::LosAbs => self.assoc.a_l,
            TierLabel::NlosAbs => self.assoc.a_n,
        }
    }

    /// Density without the `1 / r` (ABS) Jacobian and without the
    /// association normalization; see [`ServingPdfs::density`].
    fn abs_kernel(&self, tier: TierLabel, branch: Option<Branch>, r: f64) -> f64 {
        let net = &self.net;
        let (p, d) = (&net.params, &net.derived);
        let x = net.horizontal(r);
        let base = nearest_kernel(net, tier, x);
        let no_tbs = 1.0 - d.q_t;
        match tier {
            TierLabel::NlosAbs => base * net.void_los(net.horizontal(tau_los_given_nlos(net, r))) * no_tbs,
            TierLabel::LosAbs => {
                let nlos_void = net.void_nlos(net.horizontal(tau_nlos_given_los(net, r)));
                let tbs_part = if r <= d.l_lt {
                    let tau = tau_tbs_given_los(net, r).min(p.r_b);
                    (net.void_tbs(tau) - no_tbs).max(0.0)
                } else {
                    0.0
                };
                let factor = match branch {
                    Some(Branch::NoTbsInBall) => no_tbs,
                    Some(Branch::TbsInBall) => tbs_part,
                    None => no_tbs + tbs_part,
                };
                base * nlos_void * factor
            }
            TierLabel::Tbs => 0.0,
        }
    }

    /// Conditional density of the serving distance given association with
    /// `tier`. For the LoS tier, `branch` selects a sub-density; the two
    /// branches sum to the full law.
    pub fn density(&self, tier: TierLabel, branch: Option<Branch>, r: f64) -> f64 {
        let a = self.tier_prob(tier);
        if a <= 0.0 {
            return 0.0;
        }
        let p = &self.net.params;
        match tier {
            TierLabel::Tbs => {
                if !(0.0..=p.r_b).contains(&r) {
                    return 0.0;
                }
                let lost = self.los_wins_within(tau_los_given_tbs(&self.net, r));
                pdf_nearest(&self.net, TierLabel::Tbs, r) * (1.0 - lost).max(0.0) / a
            }
            _ => {
                if r < p.h {
                    return 0.0;
                }
                r * self.abs_kernel(tier, branch, r) / a
            }
        }
    }

    /// The TBS serving law in its product form `f_T(r) V_L(tau_L|T(r)) / A_T`,
    /// exact when no NLoS ABS can outshine an in-ball TBS.
    pub fn density_tbs_product_form(&self, r: f64) -> f64 {
        let a = self.assoc.a_t;
        if a <= 0.0 || !(0.0..=self.net.params.r_b).contains(&r) {
            return 0.0;
        }
        let x = self.net.horizontal(tau_los_given_tbs(&self.net, r));
        pdf_nearest(&self.net, TierLabel::Tbs, r) * self.net.void_los(x) / a
    }

    /// `int_lo^hi g(r) f(r | tier) dr` over the full conditional law.
    pub fn integrate<G>(&self, tier: TierLabel, lo: f64, hi: f64, g: G) -> Result<f64>
    where
        G: FnMut(f64) -> Result<f64>,
    {
        self.integrate_branch(tier, None, lo, hi, g)
    }

    /// As [`ServingPdfs::integrate`] with the outer quadrature settings
    /// overridden.
    pub fn integrate_with<G>(&self, tier: TierLabel, lo: f64, hi: f64, spec: &QuadratureSpec, g: G) -> Result<f64>
    where
        G: FnMut(f64) -> Result<f64>,
    {
        self.integrate_impl(tier, None, lo, hi, spec, g)
    }

    pub fn integrate_branch<G>(&self, tier: TierLabel, branch: Option<Branch>, lo: f64, hi: f64, g: G) -> Result<f64>
    where
        G: FnMut(f64) -> Result<f64>,
    {
        let spec = self.net.quad;
        self.integrate_impl(tier, branch, lo, hi, &spec, g)
    }

    fn integrate_impl<G>(
        &self,
        tier: TierLabel,
        branch: Option<Branch>,
        lo: f64,
        hi: f64,
        spec: &QuadratureSpec,
        mut g: G,
    ) -> Result<f64>
    where
        G: FnMut(f64) -> Result<f64>,
    {
        let (s_lo, s_hi) = self.support(tier, branch);
        let (lo, hi) = (lo.max(s_lo), hi.min(s_hi));
        if hi <= lo || self.tier_prob(tier) <= 0.0 {
            return Ok(0.0);
        }
        let net = &self.net;
        let (p, d) = (&net.params, &net.derived);
        match tier {
            TierLabel::Tbs => {
                let mut pts = vec![lo, hi, d.l_tl, 0.5 * p.r_b];
                pts.retain(|v| *v >= lo && *v <= hi);
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                integrate_breakpoints(|r| Ok::<f64, ModelError>(g(r)? * self.density(tier, branch, r)), &pts, spec)
            }
            _ => {
                let a = self.tier_prob(tier);
                let (xlo, xhi) = (net.horizontal(lo), net.horizontal(hi));
                let extra = [net.horizontal(d.l_lh.max(p.h)), net.horizontal(d.l_lt.max(p.h)), net.horizontal(p.r_f)];
                let pts = abs_breaks(net, xlo, xhi, &extra);
                integrate_breakpoints(
                    |x| {
                        let r = net.slant(x);
                        Ok::<f64, ModelError>(g(r)? * x * self.abs_kernel(tier, branch, r) / a)
                    },
                    &pts,
                    spec,
                )
            }
        }
    }
}
