//! Monte Carlo oracle.
//!
//! Each trial drops TBSs and ABSs as Poisson processes on the disc of
//! radius `region_radius` around a typical UE at the origin, thins the
//! ABSs into LoS and NLoS links with the S-curve, associates the UE and
//! records the raw received powers of the serving links and the aggregate
//! interference. SINRs, coverage and rates are derived from the records
//! afterwards, so one campaign serves every threshold and every SIC
//! residue `beta`.
//!
//! Only horizontal distances from the UE are stored: azimuths do not
//! enter any quantity. The paired fixed UE sits at slant distance `R_f`
//! from the serving ABS on a link of the same LoS class and sees the same
//! aggregate interference as the typical UE.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{inv_pow, inv_pow_from_square, SCurve};
use crate::coverage::NomaCase;
use crate::distances::TierLabel;
use crate::laplace::LaplaceContext;
use crate::network::Network;
use crate::params::{DerivedConstants, NetworkParams};

/// How the UE picks its server when a TBS is inside the LoS ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssociationRule {
    /// A NLoS ABS is never chosen while a TBS is in the ball; the TBS takes
    /// the UE unless the LoS ABS is strongest. Matches the analytical engine.
    #[default]
    NoNlosWithTbs,
    /// Plain maximum of the three biased powers, for measuring the gap.
    Unrestricted,
}

/// Gamma(m, 1/m) from unit exponentials.
#[inline]
fn gamma<R: Rng + ?Sized>(shape: u32, rng: &mut R) -> f64 {
    match shape {
        1 => rng.sample::<f64, _>(Exp1),
        m => (0..m).map(|_| rng.sample::<f64, _>(Exp1)).sum::<f64>() / m as f64,
    }
}

/// Bernoulli(P_L(x)) with a monotone bracketing table, so the S-curve is
/// only evaluated when the uniform falls between the bin's bounds.
#[derive(Debug, Clone)]
pub struct LosSampler {
    curve: SCurve,
    inv_step: f64,
    /// `P_L` at the bin edges; decreasing.
    edges: Vec<f64>,
}

impl LosSampler {
    pub fn new(curve: SCurve, max_x: f64) -> Self {
        let step = 5.0;
        let bins = (max_x / step).ceil() as usize + 1;
        let edges = (0..=bins).map(|i| curve.p_los(i as f64 * step)).collect();
        Self { curve, inv_step: 1.0 / step, edges }
    }

    #[inline]
    pub fn is_los(&self, x: f64, u: f64) -> bool {
        let i = (x * self.inv_step) as usize;
        if i + 1 >= self.edges.len() {
            return u < self.curve.p_los(x);
        }
        if u < self.edges[i + 1] {
            true
        } else if u >= self.edges[i] {
            false
        } else {
            u < self.curve.p_los(x)
        }
    }
}

/// One drop of both tiers around the origin.
#[derive(Debug, Clone, Default)]
pub struct NetworkRealization {
    tbs_total: usize,
    tbs_in_ball: Vec<f64>,
    abs_points: Vec<(f64, bool)>,
    nearest_los: Option<(usize, f64)>,
    nearest_nlos: Option<(usize, f64)>,
    redraws: u32,
}

impl NetworkRealization {
    /// `tbs_in_ball`: horizontal TBS distances inside the ball;
    /// `abs_points`: `(horizontal distance, LoS flag)` per ABS.
    pub fn from_points(tbs_total: usize, tbs_in_ball: Vec<f64>, abs_points: Vec<(f64, bool)>) -> Self {
        let mut real = Self { tbs_total, tbs_in_ball, ..Self::default() };
        for (x, los) in abs_points {
            real.push_abs(x, los);
        }
        real
    }

    fn clear(&mut self) {
        self.tbs_in_ball.clear();
        self.abs_points.clear();
        self.nearest_los = None;
        self.nearest_nlos = None;
    }

    #[inline]
    fn push_abs(&mut self, x: f64, los: bool) {
        let i = self.abs_points.len();
        self.abs_points.push((x, los));
        let slot = if los { &mut self.nearest_los } else { &mut self.nearest_nlos };
        if slot.is_none_or(|(_, b)| x < b) {
            *slot = Some((i, x));
        }
    }

    /// Total TBS count on the disc.
    pub fn tbs_total(&self) -> usize {
        self.tbs_total
    }

    pub fn tbs_in_ball(&self) -> &[f64] {
        &self.tbs_in_ball
    }

    pub fn abs_points(&self) -> &[(f64, bool)] {
        &self.abs_points
    }

    /// Number of empty-network redraws.
    pub fn redraws(&self) -> u32 {
        self.redraws
    }

    pub fn nearest_tbs(&self) -> Option<(usize, f64)> {
        self.tbs_in_ball.iter().copied().enumerate().fold(None, |best, (i, x)| match best {
            Some((_, b)) if b <= x => best,
            _ => Some((i, x)),
        })
    }

    /// Nearest ABS of the given LoS class, by horizontal distance.
    pub fn nearest_abs(&self, los: bool) -> Option<(usize, f64)> {
        if los {
            self.nearest_los
        } else {
            self.nearest_nlos
        }
    }
}

/// Per-scenario sampling state.
#[derive(Debug, Clone)]
pub struct Sampler {
    pub params: NetworkParams,
    pub derived: DerivedConstants,
    los: LosSampler,
    tbs_count: Poisson<f64>,
    abs_count: Option<Poisson<f64>>,
}

impl Sampler {
    pub fn new(net: &Network) -> Self {
        let p = &net.params;
        let area = std::f64::consts::PI * p.region_radius * p.region_radius;
        let tbs_mean = p.lambda_t * area;
        let abs_mean = p.lambda_a * area;
        Self {
            params: p.clone(),
            derived: net.derived.clone(),
            los: LosSampler::new(*net.scurve(), p.region_radius),
            tbs_count: Poisson::new(tbs_mean.max(1e-300)).expect("positive mean"),
            abs_count: (abs_mean > 0.0).then(|| Poisson::new(abs_mean).expect("positive mean")),
        }
    }

    #[inline]
    fn disc_distance<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.params.region_radius * rng.random::<f64>().sqrt()
    }

    /// Fills `real` with a fresh drop, redrawing while the disc holds no
    /// usable BS at all.
    pub fn sample_into<R: Rng + ?Sized>(&self, real: &mut NetworkRealization, rng: &mut R) {
        let p = &self.params;
        real.redraws = 0;
        loop {
            real.clear();
            real.tbs_total = self.tbs_count.sample(rng) as usize;
            let frac = (p.r_b / p.region_radius).powi(2).min(1.0);
            let inside = Binomial::new(real.tbs_total as u64, frac).expect("valid binomial").sample(rng);
            real.tbs_in_ball.extend((0..inside).map(|_| p.r_b * rng.random::<f64>().sqrt()));
            let n_abs = self.abs_count.map_or(0, |d| d.sample(rng) as usize);
            real.abs_points.reserve(n_abs);
            for _ in 0..n_abs {
                let x = self.disc_distance(rng);
                let los = self.los.is_los(x, rng.random());
                real.push_abs(x, los);
            }
            if !real.tbs_in_ball.is_empty() || !real.abs_points.is_empty() {
                return;
            }
            real.redraws += 1;
        }
    }

    pub fn sample_realization<R: Rng + ?Sized>(&self, rng: &mut R) -> NetworkRealization {
        let mut real = NetworkRealization::default();
        self.sample_into(&mut real, rng);
        real
    }

    fn slant(&self, x: f64) -> f64 {
        (x * x + self.params.h * self.params.h).sqrt()
    }

    /// Picks the serving BS by biased average received power.
    pub fn associate(&self, real: &NetworkRealization, rule: AssociationRule) -> AssociationOutcome {
        let (p, d) = (&self.params, &self.derived);
        let tbs = real.nearest_tbs();
        let los = real.nearest_abs(true).map(|(i, x)| (i, self.slant(x)));
        let nlos = real.nearest_abs(false).map(|(i, x)| (i, self.slant(x)));
        let power = |tier: TierLabel, r: f64| match tier {
            TierLabel::Tbs => d.eta_t * inv_pow(r, p.alpha_t),
            TierLabel::LosAbs => d.eta_l * inv_pow(r, p.alpha_l),
            TierLabel::NlosAbs => d.eta_n * inv_pow(r, p.alpha_n),
        };
        let mut best: Option<(TierLabel, usize, f64, f64)> = None;
        for (tier, cand) in [(TierLabel::Tbs, tbs), (TierLabel::LosAbs, los), (TierLabel::NlosAbs, nlos)] {
            if let Some((i, r)) = cand {
                let pw = power(tier, r);
                if best.is_none_or(|b| pw > b.3) {
                    best = Some((tier, i, r, pw));
                }
            }
        }
        let (mut tier, mut index, mut distance, _) = best.expect("realization holds at least one BS");
        if rule == AssociationRule::NoNlosWithTbs && tier == TierLabel::NlosAbs {
            if let Some((i, r)) = tbs {
                (tier, index, distance) = (TierLabel::Tbs, i, r);
            }
        }
        AssociationOutcome {
            tier,
            index,
            distance,
            tbs_in_ball: tbs.is_some(),
            nearest_tbs: tbs.map_or(f64::INFINITY, |t| t.1),
            nearest_los: los.map_or(f64::INFINITY, |t| t.1),
            nearest_nlos: nlos.map_or(f64::INFINITY, |t| t.1),
        }
    }

    /// Draws the fading of every link of the realized network and returns
    /// the received powers the SINR chain needs.
    pub fn evaluate_trial<R: Rng + ?Sized>(
        &self,
        real: &NetworkRealization,
        assoc: &AssociationOutcome,
        rng: &mut R,
    ) -> TrialRecord {
        let (p, d) = (&self.params, &self.derived);
        let mut rec = TrialRecord {
            tier: assoc.tier,
            distance: assoc.distance,
            tbs_in_ball: assoc.tbs_in_ball,
            nearest_tbs: assoc.nearest_tbs,
            nearest_los: assoc.nearest_los,
            nearest_nlos: assoc.nearest_nlos,
            signal: 0.0,
            fixed_signal: 0.0,
            interference: 0.0,
        };
        match assoc.tier {
            TierLabel::Tbs => {
                rec.signal = d.eta_t * gamma(p.m_t, rng) * inv_pow(assoc.distance, p.alpha_t);
                let (before, after) = real.tbs_in_ball.split_at(assoc.index);
                rec.interference = before.iter().chain(&after[1..]).map(|r| self.tbs_interferer(*r, rng)).sum();
            }
            tier => {
                let (m, c, alpha) = self.abs_class(tier == TierLabel::LosAbs);
                rec.signal = d.p_a * c * gamma(m, rng) * inv_pow(assoc.distance, alpha);
                rec.fixed_signal = d.p_a * c * gamma(m, rng) * inv_pow(p.r_f, alpha);
                let h2 = p.h * p.h;
                let (before, after) = real.abs_points.split_at(assoc.index);
                rec.interference =
                    before.iter().chain(&after[1..]).map(|&(x, los)| self.abs_interferer(x * x + h2, los, rng)).sum();
            }
        }
        rec
    }

    fn abs_class(&self, los: bool) -> (u32, f64, f64) {
        let (p, d) = (&self.params, &self.derived);
        if los {
            (p.m_l, d.c_l, p.alpha_l)
        } else {
            (p.m_n, d.c_n, p.alpha_n)
        }
    }

    #[inline]
    fn abs_interferer<R: Rng + ?Sized>(&self, d2: f64, los: bool, rng: &mut R) -> f64 {
        let (m, c, alpha) = self.abs_class(los);
        self.derived.p_a * c * gamma(m, rng) * inv_pow_from_square(d2, alpha)
    }

    #[inline]
    fn tbs_interferer<R: Rng + ?Sized>(&self, r: f64, rng: &mut R) -> f64 {
        let (p, d) = (&self.params, &self.derived);
        let gain = if rng.random::<f64>() < d.p_main { d.g_main } else { d.g_side };
        gain * d.p_t * d.c_t * gamma(p.m_t, rng) * inv_pow(r, p.alpha_t)
    }

    /// One draw of the TBS interference seen at the origin from TBSs in
    /// the annulus `[r0, R_B]`.
    pub fn sample_tbs_interference<R: Rng + ?Sized>(&self, r0: f64, rng: &mut R) -> f64 {
        let p = &self.params;
        let (a, b) = (r0 * r0, p.r_b * p.r_b);
        let mean = p.lambda_t * std::f64::consts::PI * (b - a);
        if mean <= 0.0 {
            return 0.0;
        }
        let n = Poisson::new(mean).expect("positive mean").sample(rng) as usize;
        (0..n)
            .map(|_| {
                let r = (a + (b - a) * rng.random::<f64>()).sqrt();
                self.tbs_interferer(r, rng)
            })
            .sum()
    }

    /// One draw of the ABS interference with LoS and NLoS interferers kept
    /// outside the horizontal radii of `ctx`.
    pub fn sample_abs_interference<R: Rng + ?Sized>(&self, ctx: &LaplaceContext, rng: &mut R) -> f64 {
        let p = &self.params;
        let Some(count) = self.abs_count else { return 0.0 };
        let h2 = p.h * p.h;
        let n = count.sample(rng) as usize;
        let (los_lo2, nlos_lo2) = (ctx.los_lower * ctx.los_lower, ctx.nlos_lower * ctx.nlos_lower);
        let mut total = 0.0;
        for _ in 0..n {
            let x = self.disc_distance(rng);
            let los = self.los.is_los(x, rng.random());
            let x2 = x * x;
            let keep = if los { x2 >= los_lo2 } else { x2 >= nlos_lo2 };
            if keep {
                total += self.abs_interferer(x2 + h2, los, rng);
            }
        }
        total
    }
}

/// Association decision of one trial. Distances are horizontal for the
/// TBS and slant for ABSs; absent classes are at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationOutcome {
    pub tier: TierLabel,
    pub index: usize,
    pub distance: f64,
    pub tbs_in_ball: bool,
    pub nearest_tbs: f64,
    pub nearest_los: f64,
    pub nearest_nlos: f64,
}

/// Raw outcome of one trial. `signal` is the serving link's received
/// power at full transmit power (TBS: with main-lobe gain); for ABS
/// service `fixed_signal` is the paired UE's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub tier: TierLabel,
    pub distance: f64,
    pub tbs_in_ball: bool,
    pub nearest_tbs: f64,
    pub nearest_los: f64,
    pub nearest_nlos: f64,
    pub signal: f64,
    pub fixed_signal: f64,
    pub interference: f64,
}

/// SINRs of one ABS-served trial for a given SIC residue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NomaSinrs {
    pub case: NomaCase,
    /// Near case: the typical UE decoding the fixed UE's message first.
    pub typical_first_stage: Option<f64>,
    /// Typical UE's own message.
    pub typical: f64,
    /// Fixed UE's own message.
    pub fixed: f64,
    /// Typical UE with the whole slot and no NOMA partner.
    pub oma_typical: f64,
    pub oma_fixed: f64,
}

/// Derived per-trial view: the SINR chain of the realized case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub tier: TierLabel,
    pub distance: f64,
    pub tbs_sinr: Option<f64>,
    pub noma: Option<NomaSinrs>,
}

impl TrialOutcome {
    pub fn from_record(rec: &TrialRecord, p: &NetworkParams, d: &DerivedConstants) -> Self {
        match rec.tier {
            TierLabel::Tbs => Self {
                tier: rec.tier,
                distance: rec.distance,
                tbs_sinr: Some(rec.signal / (rec.interference + d.sigma2_t)),
                noma: None,
            },
            _ => Self { tier: rec.tier, distance: rec.distance, tbs_sinr: None, noma: Some(noma_sinrs(rec, p, d)) },
        }
    }

    /// Coverage of the typical UE: the TBS SINR against `nu`, or the NOMA
    /// decoding chain against `thr`.
    pub fn covered(&self, nu: f64, eps_f: f64, eps_t: f64) -> bool {
        match (self.tbs_sinr, self.noma) {
            (Some(g), _) => g > nu,
            (_, Some(n)) => match n.case {
                NomaCase::Near => n.typical_first_stage.is_some_and(|g| g > eps_f) && n.typical > eps_t,
                NomaCase::Far => n.typical > eps_t,
            },
            _ => false,
        }
    }
}

pub fn noma_sinrs(rec: &TrialRecord, p: &NetworkParams, d: &DerivedConstants) -> NomaSinrs {
    let j = rec.interference + d.sigma2_a;
    let (s, sf) = (rec.signal, rec.fixed_signal);
    let (a_m, a_n, beta) = (p.a_m, p.a_n, p.beta);
    let case = NomaCase::of_distance(rec.distance, p.r_f);
    let strong = |x: f64| a_m * x / (a_n * x + j);
    let weak = |x: f64| a_n * x / (j + beta * a_m * x);
    let (first, typical, fixed) = match case {
        NomaCase::Near => (Some(strong(s)), weak(s), strong(sf)),
        NomaCase::Far => (None, strong(s), weak(sf)),
    };
    NomaSinrs { case, typical_first_stage: first, typical, fixed, oma_typical: s / j, oma_fixed: sf / j }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    pub fn empty() -> Self {
        Self { mean: f64::NAN, se: f64::NAN, n: 0 }
    }

    pub fn from_flags(hits: usize, n: usize) -> Self {
        if n == 0 {
            return Self::empty();
        }
        let p = hits as f64 / n as f64;
        Self { mean: p, se: (p * (1.0 - p) / n as f64).sqrt(), n }
    }

    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self::empty();
        }
        let mean = pairwise_sum(xs) / n as f64;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = if n > 1 { pairwise_sum(&dev) / (n - 1) as f64 } else { 0.0 };
        Self { mean, se: (var / n as f64).sqrt(), n }
    }
}

/// Pairwise summation; its rounding error grows with `log n`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Campaign settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: usize,
    pub seed: u64,
    pub rule: AssociationRule,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { trials: 100_000, seed: 1, rule: AssociationRule::default() }
    }
}

/// Generator of one trial.
pub type TrialRng = ChaCha8Rng;

/// Random stream of trial `index`: independent of how trials are spread
/// over worker threads.
pub fn trial_rng(seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// All trial records of one scenario.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub params: NetworkParams,
    pub derived: DerivedConstants,
    pub config: SimConfig,
    pub records: Vec<TrialRecord>,
    pub redraws: u64,
}

pub fn run_campaign(net: &Network, config: SimConfig) -> Campaign {
    let sampler = Sampler::new(net);
    let out: Vec<(TrialRecord, u32)> = (0..config.trials as u64)
        .into_par_iter()
        .map_init(NetworkRealization::default, |real, i| {
            let mut rng = trial_rng(config.seed, i);
            sampler.sample_into(real, &mut rng);
            let assoc = sampler.associate(real, config.rule);
            (sampler.evaluate_trial(real, &assoc, &mut rng), real.redraws)
        })
        .collect();
    let redraws = out.iter().map(|(_, r)| *r as u64).sum();
    Campaign {
        params: net.params.clone(),
        derived: net.derived.clone(),
        config,
        records: out.into_iter().map(|(r, _)| r).collect(),
        redraws,
    }
}

/// Monte Carlo metrics of one tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierMetrics {
    pub association: Estimate,
    pub coverage: Estimate,
    pub rate: Estimate,
}

impl Campaign {
    /// Campaign with a different SIC residue; the records do not depend on it.
    pub fn with_beta(&self, beta: f64) -> Self {
        let mut c = self.clone();
        c.params.beta = beta;
        c
    }

    fn outcomes(&self) -> impl Iterator<Item = TrialOutcome> + '_ {
        self.records.iter().map(|r| TrialOutcome::from_record(r, &self.params, &self.derived))
    }

    pub fn trials(&self) -> usize {
        self.records.len()
    }

    pub fn association(&self, tier: TierLabel) -> Estimate {
        let hits = self.records.iter().filter(|r| r.tier == tier).count();
        Estimate::from_flags(hits, self.trials())
    }

    pub fn abs_association(&self) -> Estimate {
        let hits = self.records.iter().filter(|r| r.tier.is_abs()).count();
        Estimate::from_flags(hits, self.trials())
    }

    /// Coverage of TBS-associated trials at SINR threshold `nu`.
    pub fn coverage_tbs(&self, nu: f64) -> Estimate {
        let sinrs: Vec<f64> = self.outcomes().filter_map(|o| o.tbs_sinr).collect();
        Estimate::from_flags(sinrs.iter().filter(|g| **g > nu).count(), sinrs.len())
    }

    fn noma(&self, filter: impl Fn(&TrialRecord) -> bool) -> Vec<NomaSinrs> {
        self.records
            .iter()
            .filter(|r| r.tier.is_abs() && filter(r))
            .map(|r| noma_sinrs(r, &self.params, &self.derived))
            .collect()
    }

    /// NOMA coverage of ABS-associated trials.
    pub fn coverage_noma(&self, eps_f: f64, eps_t: f64) -> Estimate {
        self.coverage_noma_where(eps_f, eps_t, |_| true)
    }

    pub fn coverage_noma_where(&self, eps_f: f64, eps_t: f64, filter: impl Fn(&TrialRecord) -> bool) -> Estimate {
        let outcomes: Vec<TrialOutcome> =
            self.outcomes().zip(&self.records).filter(|(o, r)| o.noma.is_some() && filter(r)).map(|(o, _)| o).collect();
        let hits = outcomes.iter().filter(|o| o.covered(f64::INFINITY, eps_f, eps_t)).count();
        Estimate::from_flags(hits, outcomes.len())
    }

    /// OMA baseline: the typical UE gets half the resources at full power
    /// and is covered when its halved rate reaches `log2(1 + eps_t)`.
    pub fn coverage_oma(&self, eps_t: f64) -> Estimate {
        let need = (1.0 + eps_t).powi(2) - 1.0;
        let v = self.noma(|_| true);
        Estimate::from_flags(v.iter().filter(|n| n.oma_typical > need).count(), v.len())
    }

    /// Mean `log2(1 + SINR)` of TBS-associated trials.
    pub fn rate_tbs(&self) -> Estimate {
        let xs: Vec<f64> =
            self.outcomes().filter_map(|o| o.tbs_sinr).map(|g| g.ln_1p() / std::f64::consts::LN_2).collect();
        Estimate::from_samples(&xs)
    }

    /// Mean per-pair NOMA spectrum efficiency of ABS-associated trials.
    pub fn rate_noma(&self) -> Estimate {
        self.rate_noma_where(|_| true)
    }

    pub fn rate_noma_where(&self, filter: impl Fn(&TrialRecord) -> bool) -> Estimate {
        let xs: Vec<f64> = self
            .noma(filter)
            .iter()
            .map(|n| n.typical.ln_1p() / std::f64::consts::LN_2 + n.fixed.ln_1p() / std::f64::consts::LN_2)
            .collect();
        Estimate::from_samples(&xs)
    }

    pub fn rate_oma(&self) -> Estimate {
        let xs: Vec<f64> = self
            .noma(|_| true)
            .iter()
            .map(|n| 0.5 * (n.oma_typical.ln_1p() + n.oma_fixed.ln_1p()) / std::f64::consts::LN_2)
            .collect();
        Estimate::from_samples(&xs)
    }

    pub fn tbs_metrics(&self, nu: f64) -> TierMetrics {
        TierMetrics {
            association: self.association(TierLabel::Tbs),
            coverage: self.coverage_tbs(nu),
            rate: self.rate_tbs(),
        }
    }

    pub fn noma_metrics(&self, eps_f: f64, eps_t: f64) -> TierMetrics {
        TierMetrics {
            association: self.abs_association(),
            coverage: self.coverage_noma(eps_f, eps_t),
            rate: self.rate_noma(),
        }
    }

    /// Serving distances of trials associated with `tier`.
    pub fn serving_distances(&self, tier: TierLabel) -> Vec<f64> {
        self.records.iter().filter(|r| r.tier == tier).map(|r| r.distance).collect()
    }
}

/// Empirical `E[exp(-s I)]`.
pub fn empirical_laplace(samples: &[f64], s: f64) -> Estimate {
    let xs: Vec<f64> = samples.iter().map(|i| (-s * i).exp()).collect();
    Estimate::from_samples(&xs)
}

/// `n` independent interference draws for a Laplace check, on per-draw
/// streams of `seed`.
pub fn interference_draws<F>(n: usize, seed: u64, draw: F) -> Vec<f64>
where
    F: Fn(&mut TrialRng) -> f64 + Sync,
{
    (0..n as u64).into_par_iter().map(|i| draw(&mut trial_rng(seed, i))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::NetworkParams;

    fn sampler_with(f: impl FnOnce(&mut NetworkParams)) -> Sampler {
        let mut p = NetworkParams::default();
        f(&mut p);
        Sampler::new(&Network::new(p).unwrap())
    }

    #[test]
    fn squeeze_sampler_is_exact() {
        let net = Network::reference();
        let s = LosSampler::new(*net.scurve(), 1000.0);
        let mut rng = trial_rng(3, 0);
        for _ in 0..200_000 {
            let x = 1200.0 * rng.random::<f64>();
            let u = rng.random::<f64>();
            assert_eq!(s.is_los(x, u), u < net.scurve().p_los(x), "x = {x}, u = {u}");
        }
    }

    #[test]
    fn no_abs_without_density() {
        // zero density is rejected by validation; 1e-16 leaves ~1e-5 expected points
        let s = sampler_with(|p| p.lambda_a = 1e-16);
        let mut rng = trial_rng(1, 0);
        for _ in 0..50 {
            let real = s.sample_realization(&mut rng);
            assert!(real.abs_points().is_empty());
            assert!(!real.tbs_in_ball().is_empty());
        }
    }

    #[test]
    fn tbs_count_matches_poisson_mean() {
        let s = sampler_with(|p| p.lambda_a = 1e-9);
        let mut rng = trial_rng(5, 0);
        let n = 10_000;
        let total: usize = (0..n).map(|_| s.sample_realization(&mut rng).tbs_total()).sum();
        let p = &s.params;
        let mean = p.lambda_t * std::f64::consts::PI * p.region_radius.powi(2);
        let sigma = (mean / n as f64).sqrt();
        assert!((total as f64 / n as f64 - mean).abs() < 3.0 * sigma);
    }

    #[test]
    fn los_fraction_in_a_ring_follows_the_s_curve() {
        let net = Network::reference();
        let s = Sampler::new(&net);
        let mut rng = trial_rng(9, 0);
        let (mut los, mut all, mut expected) = (0usize, 0usize, 0.0);
        for _ in 0..300 {
            let real = s.sample_realization(&mut rng);
            for &(x, l) in real.abs_points().iter().filter(|(x, _)| (200.0..210.0).contains(x)) {
                all += 1;
                los += l as usize;
                expected += net.scurve().p_los(x);
            }
        }
        let p = expected / all as f64;
        let se = (p * (1.0 - p) / all as f64).sqrt();
        assert!(((los as f64 / all as f64) - p).abs() < 4.0 * se, "{los}/{all} vs {p}");
    }

    fn realization(tbs: &[f64], abs: &[(f64, bool)]) -> NetworkRealization {
        NetworkRealization::from_points(tbs.len(), tbs.to_vec(), abs.to_vec())
    }

    #[test]
    fn overhead_los_abs_serves_without_tbs() {
        let s = sampler_with(|_| {});
        let a = s.associate(&realization(&[], &[(0.0, true), (900.0, false)]), AssociationRule::default());
        assert_eq!(a.tier, TierLabel::LosAbs);
        assert_eq!(a.distance, s.params.h);
    }

    #[test]
    fn close_tbs_beats_distant_los_abs() {
        let s = sampler_with(|_| {});
        let x = (400f64.powi(2) - s.params.h.powi(2)).sqrt();
        let a = s.associate(&realization(&[10.0], &[(x, true)]), AssociationRule::default());
        assert_eq!(a.tier, TierLabel::Tbs);
        assert_eq!(a.distance, 10.0);
    }

    #[test]
    fn nlos_never_serves_with_tbs_in_ball() {
        let s = sampler_with(|_| {});
        // NLoS overhead is the strongest; LoS far away.
        let real = realization(&[200.0], &[(0.0, false), (3000.0, true)]);
        assert_eq!(s.associate(&real, AssociationRule::default()).tier, TierLabel::Tbs);
        assert_eq!(s.associate(&real, AssociationRule::Unrestricted).tier, TierLabel::NlosAbs);
    }

    #[test]
    fn first_stage_sinr_tends_to_power_ratio() {
        let p = NetworkParams::default();
        let mut d = crate::params::DerivedConstants::build(&p).unwrap();
        d.sigma2_a = 0.0;
        let rec = TrialRecord {
            tier: TierLabel::LosAbs,
            distance: p.h,
            tbs_in_ball: false,
            nearest_tbs: f64::INFINITY,
            nearest_los: p.h,
            nearest_nlos: f64::INFINITY,
            signal: 1.0,
            fixed_signal: 0.5,
            interference: 0.0,
        };
        let n = noma_sinrs(&rec, &p, &d);
        assert!((n.typical_first_stage.unwrap() - p.a_m / p.a_n).abs() < 1e-12);
        // residue term present
        assert!((n.typical - p.a_n / (p.beta * p.a_m)).abs() < 1e-12);
        let q = NetworkParams { beta: 0.0, ..p };
        assert!(noma_sinrs(&rec, &q, &d).typical.is_infinite());
    }

    #[test]
    fn single_trial_is_degenerate() {
        let c = run_campaign(&Network::reference(), SimConfig { trials: 1, seed: 4, rule: AssociationRule::default() });
        let total: f64 = TierLabel::ALL.iter().map(|t| c.association(*t).mean).sum();
        assert_eq!(total, 1.0);
        for t in TierLabel::ALL {
            let m = c.association(t).mean;
            assert!(m == 0.0 || m == 1.0);
        }
    }

    #[test]
    fn campaigns_are_reproducible_and_scale() {
        let net = Network::reference();
        let cfg = SimConfig { trials: 400, seed: 11, rule: AssociationRule::default() };
        let a = run_campaign(&net, cfg);
        let b = run_campaign(&net, cfg);
        assert_eq!(a.records, b.records);
        let freq: f64 = TierLabel::ALL.iter().map(|t| a.association(*t).mean).sum();
        assert!((freq - 1.0).abs() < 1e-12);
        for r in &a.records {
            if r.tier.is_abs() {
                let case = NomaCase::of_distance(r.distance, net.params.r_f);
                assert_eq!(case == NomaCase::Near, r.distance <= net.params.r_f);
            }
        }
    }

    #[test]
    fn coverage_non_increasing_in_threshold() {
        let c =
            run_campaign(&Network::reference(), SimConfig { trials: 300, seed: 2, rule: AssociationRule::default() });
        let mut last = (2.0, 2.0);
        for db in (-10..=10).step_by(2) {
            let eps = 10f64.powf(db as f64 / 10.0);
            let now = (c.coverage_tbs(eps).mean, c.coverage_noma(eps, eps).mean);
            assert!(now.0 <= last.0 && now.1 <= last.1);
            last = now;
        }
    }
}
