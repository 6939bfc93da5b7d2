//! Quadrature and special functions shared by the analytical engine.
//!
//! The workhorse is a globally adaptive 21-point Gauss-Kronrod integrator
//! that accepts fallible integrands, so nested integrals can propagate
//! inner failures without panicking. Semi-infinite ranges are mapped onto
//! `(0, 1]` with `t = a + (1 - u) / u`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Failure modes of the quadrature routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions: estimate {estimate:e}, residual {residual:e}"
    )]
    NonConvergence { estimate: f64, residual: f64, subdivisions: usize },
    #[error("integrand returned a non-finite value at t = {at}")]
    NonFinite { at: f64 },
    #[error("invalid integration interval [{lower}, {upper}]")]
    InvalidInterval { lower: f64, upper: f64 },
    #[error("integrable singularity at the origin: p = {p} must be positive")]
    SingularAtOrigin { p: f64 },
    #[error("incomplete beta B({x}; {p}, {q}) is not real-valued on this path")]
    ComplexValued { x: f64, p: f64, q: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Adaptive,
    GaussChebyshev,
}

/// Quadrature configuration. `nodes` only matters for Gauss-Chebyshev,
/// the tolerances and subdivision cap only for the adaptive scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    pub nodes: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { scheme: Scheme::Adaptive, nodes: 50, rel_tol: 1e-8, abs_tol: 1e-12, max_subdivisions: 2000 }
    }
}

impl QuadratureSpec {
    pub fn adaptive(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }

    pub fn gauss_chebyshev(nodes: usize) -> Self {
        Self { scheme: Scheme::GaussChebyshev, nodes: nodes.max(1), ..Self::default() }
    }
}

// Gauss-Kronrod 21-point abscissae and weights (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_958_109_831,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];
// 10-point Gauss weights paired with XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lower: f64,
    upper: f64,
    estimate: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn checked<E>(value: f64, at: f64) -> Result<f64, E>
where
    E: From<QuadratureError>,
{
    if value.is_finite() {
        Ok(value)
    } else {
        Err(QuadratureError::NonFinite { at }.into())
    }
}

/// One Gauss-Kronrod panel: returns (Kronrod estimate, error estimate).
fn gk21<E, F>(f: &mut F, lower: f64, upper: f64) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    let center = 0.5 * (lower + upper);
    let half = 0.5 * (upper - lower);
    let fc = checked(f(center)?, center)?;
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut values = [(0.0, 0.0); 10];
    for (j, &x) in XGK.iter().take(10).enumerate() {
        let t1 = center - half * x;
        let t2 = center + half * x;
        let f1 = checked(f(t1)?, t1)?;
        let f2 = checked(f(t2)?, t2)?;
        values[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for (j, &(f1, f2)) in values.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let result = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((result, err))
}

/// Adaptive integration over a list of consecutive breakpoints, for a
/// fallible integrand. Breakpoints must be finite and increasing.
pub fn integrate_breakpoints<E, F>(mut f: F, points: &[f64], spec: &QuadratureSpec) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    if points.len() < 2 {
        return Ok(0.0);
    }
    for w in points.windows(2) {
        if !(w[0].is_finite() && w[1].is_finite()) || w[1] < w[0] {
            return Err(QuadratureError::InvalidInterval { lower: w[0], upper: w[1] }.into());
        }
    }
    if spec.scheme == Scheme::GaussChebyshev {
        let mut total = 0.0;
        for w in points.windows(2) {
            total += gauss_chebyshev_try(&mut f, w[0], w[1], spec.nodes)?;
        }
        return Ok(total);
    }

    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (estimate, error) = gk21(&mut f, w[0], w[1])?;
            heap.push(Panel { lower: w[0], upper: w[1], estimate, error });
        }
    }
    let mut subdivisions = 0usize;
    loop {
        let (estimate, residual) = heap.iter().fold((0.0, 0.0), |(s, e), p| (s + p.estimate, e + p.error));
        if residual <= spec.abs_tol.max(spec.rel_tol * estimate.abs()) {
            return Ok(estimate);
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Ok(0.0),
        };
        let mid = 0.5 * (worst.lower + worst.upper);
        let too_narrow = mid <= worst.lower || mid >= worst.upper;
        if subdivisions >= spec.max_subdivisions || too_narrow {
            return Err(QuadratureError::NonConvergence { estimate, residual, subdivisions }.into());
        }
        subdivisions += 1;
        for (lo, hi) in [(worst.lower, mid), (mid, worst.upper)] {
            let (estimate, error) = gk21(&mut f, lo, hi)?;
            heap.push(Panel { lower: lo, upper: hi, estimate, error });
        }
    }
}

/// Integrate a fallible integrand over `[lower, upper]`; `upper` may be
/// `f64::INFINITY`.
pub fn integrate_try<E, F>(mut f: F, lower: f64, upper: f64, spec: &QuadratureSpec) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    if lower.is_nan() || upper.is_nan() || lower.is_infinite() || upper < lower {
        return Err(QuadratureError::InvalidInterval { lower, upper }.into());
    }
    if upper == lower {
        return Ok(0.0);
    }
    if upper.is_infinite() {
        let mapped = |u: f64| -> Result<f64, E> {
            let t = lower + (1.0 - u) / u;
            Ok(f(t)? / (u * u))
        };
        return integrate_breakpoints(mapped, &[0.0, 1.0], spec);
    }
    integrate_breakpoints(f, &[lower, upper], spec)
}

/// Integrate an infallible integrand over `[lower, upper]` (`upper` may be
/// infinite).
pub fn integrate<F>(mut f: F, lower: f64, upper: f64, spec: &QuadratureSpec) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    integrate_try(|t| Ok::<f64, QuadratureError>(f(t)), lower, upper, spec)
}

/// A Gauss-Chebyshev node mapped to `[-1, 1]`, with the weight `pi / N`
/// and the compensation factor `sqrt(1 - r^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevNode {
    pub node: f64,
    pub weight: f64,
    pub factor: f64,
}

pub fn gauss_chebyshev_nodes(n: usize) -> Vec<ChebyshevNode> {
    let n = n.max(1);
    let weight = PI / n as f64;
    (1..=n)
        .map(|i| {
            let angle = (2 * i - 1) as f64 * PI / (2 * n) as f64;
            ChebyshevNode { node: angle.cos(), weight, factor: angle.sin() }
        })
        .collect()
}

/// Affine map of a Chebyshev node from `[-1, 1]` onto `[lower, upper]`.
#[inline]
pub fn map_node(node: f64, lower: f64, upper: f64) -> f64 {
    0.5 * (upper - lower) * node + 0.5 * (upper + lower)
}

fn gauss_chebyshev_try<E, F>(f: &mut F, lower: f64, upper: f64, n: usize) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    let mut sum = 0.0;
    for node in gauss_chebyshev_nodes(n) {
        let t = map_node(node.node, lower, upper);
        sum += node.weight * node.factor * checked(f(t)?, t)?;
    }
    Ok(0.5 * (upper - lower) * sum)
}

/// Fixed-order Gauss-Chebyshev estimate of `int_lower^upper f`.
pub fn gauss_chebyshev<F>(mut f: F, lower: f64, upper: f64, n: usize) -> f64
where
    F: FnMut(f64) -> f64,
{
    gauss_chebyshev_nodes(n)
        .iter()
        .map(|node| node.weight * node.factor * f(map_node(node.node, lower, upper)))
        .sum::<f64>()
        * 0.5
        * (upper - lower)
}

const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_888_9),
    (-0.538_469_310_105_683_091_0, 0.478_628_670_499_366_468_0),
    (0.538_469_310_105_683_091_0, 0.478_628_670_499_366_468_0),
    (-0.906_179_845_938_663_993_0, 0.236_926_885_056_189_088_0),
    (0.906_179_845_938_663_993_0, 0.236_926_885_056_189_088_0),
];

/// Running integral `F(w) = int_{x0}^{w} f(x) dx` backed by a prefix table
/// over fixed panels. Each lookup adds a 5-point Gauss-Legendre rule on the
/// partial interval, so panels must be narrow relative to the integrand's
/// features.
#[derive(Clone)]
pub struct CumulativeIntegral {
    breaks: Vec<f64>,
    prefix: Vec<f64>,
    integrand: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for CumulativeIntegral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CumulativeIntegral")
            .field("panels", &(self.breaks.len().saturating_sub(1)))
            .field("total", &self.prefix.last())
            .finish()
    }
}

impl CumulativeIntegral {
    pub fn new<F>(integrand: F, breaks: Vec<f64>) -> Result<Self, QuadratureError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let spec = QuadratureSpec::adaptive(1e-12, 0.0);
        let mut prefix = Vec::with_capacity(breaks.len());
        let mut acc = 0.0;
        prefix.push(0.0);
        for w in breaks.windows(2) {
            acc += integrate(&integrand, w[0], w[1], &spec).or_else(|e| match e {
                QuadratureError::NonConvergence { estimate, .. } => Ok(estimate),
                other => Err(other),
            })?;
            prefix.push(acc);
        }
        Ok(Self { breaks, prefix, integrand: Arc::new(integrand) })
    }

    pub fn lower(&self) -> f64 {
        self.breaks[0]
    }

    pub fn upper(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    /// `int_{lower}^{w} f`, with `w` clamped into the tabulated range.
    pub fn eval(&self, w: f64) -> f64 {
        let w = w.clamp(self.lower(), self.upper());
        let k = match self.breaks.binary_search_by(|b| b.total_cmp(&w)) {
            Ok(k) => return self.prefix[k],
            Err(k) => k - 1,
        };
        let (lo, hi) = (self.breaks[k], w);
        let (half, mid) = (0.5 * (hi - lo), 0.5 * (hi + lo));
        let partial =
            half * GL5.iter().map(|&(node, weight)| weight * (self.integrand)(mid + half * node)).sum::<f64>();
        self.prefix[k] + partial
    }
}

/// Incomplete beta function `B(x; p, q) = int_0^x t^(p-1) (1-t)^(q-1) dt`
/// evaluated by direct quadrature along the real segment `[0, x]`.
///
/// Negative `x` is handled through `t = x u`, which is real only for
/// integer `p`. The `t^(p-1)` endpoint singularity is removed with
/// `t = x v^(1/p)`.
pub fn incomplete_beta(x: f64, p: f64, q: f64) -> Result<f64, QuadratureError> {
    if p <= 0.0 {
        return Err(QuadratureError::SingularAtOrigin { p });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x > 1.0 || (x == 1.0 && q <= 0.0) {
        return Err(QuadratureError::ComplexValued { x, p, q });
    }
    let p_int = (p - p.round()).abs() < 1e-12;
    if x < 0.0 && !p_int {
        return Err(QuadratureError::ComplexValued { x, p, q });
    }
    let spec = QuadratureSpec::adaptive(1e-12, 0.0);
    // B = x^p / p * int_0^1 (1 - x v^(1/p))^(q-1) dv
    let inner = integrate(|v| (1.0 - x * v.powf(1.0 / p)).powf(q - 1.0), 0.0, 1.0, &spec)?;
    let scale = if p_int { x.powi(p.round() as i32) } else { x.powf(p) };
    Ok(scale * inner / p)
}

/// `int_lo^hi t^(p-1) (1-t)^(q-1) dt` over a segment that does not touch
/// the origin, i.e. `B(hi; p, q) - B(lo; p, q)` without requiring `p > 0`.
/// Integrates in `log|t|` since the segment may span many decades.
pub fn beta_segment(lo: f64, hi: f64, p: f64, q: f64) -> Result<f64, QuadratureError> {
    if lo == hi {
        return Ok(0.0);
    }
    if lo.signum() != hi.signum() || lo == 0.0 || hi == 0.0 || lo.max(hi) >= 1.0 {
        return Err(QuadratureError::InvalidInterval { lower: lo, upper: hi });
    }
    let p_int = (p - p.round()).abs() < 1e-12;
    if lo < 0.0 && !p_int {
        return Err(QuadratureError::ComplexValued { x: lo, p, q });
    }
    let sign = lo.signum();
    let power = |t: f64| {
        if p_int {
            t.powi(p.round() as i32)
        } else {
            t.powf(p)
        }
    };
    // t = sign * e^y, dt = t dy, so the integrand becomes t^p (1-t)^(q-1).
    let (ya, yb) = (lo.abs().ln(), hi.abs().ln());
    let spec = QuadratureSpec::adaptive(1e-12, 0.0);
    let g = |y: f64| {
        let t = sign * y.exp();
        power(t) * (1.0 - t).powf(q - 1.0)
    };
    let value = integrate(g, ya.min(yb), ya.max(yb), &spec)?;
    // Orientation: y runs with |t|; for negative t this reverses direction.
    let forward = if sign > 0.0 { yb > ya } else { yb < ya };
    Ok(sign * if forward { value } else { -value })
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
