//! Immutable per-scenario context shared by the analytical modules.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::channel::SCurve;
use crate::error::Result;
use crate::numerics::{CumulativeIntegral, QuadratureSpec};
use crate::params::{DerivedConstants, NetworkParams};

/// Parameters, derived constants and cached LoS/NLoS mass tables.
///
/// `los_mass(w) = int_0^w x P_L(x) dx` and its NLoS complement appear in
/// every void probability; the LoS mass is tabulated once on construction.
#[derive(Debug, Clone)]
pub struct Network {
    pub params: NetworkParams,
    pub derived: DerivedConstants,
    /// Outer-integral settings. Inner integrals (Laplace exponents) use
    /// [`Network::inner_quad`].
    pub quad: QuadratureSpec,
    scurve: SCurve,
    los_mass: Arc<CumulativeIntegral>,
}

fn mass_breaks(h: f64, region: f64) -> Vec<f64> {
    let mut breaks = Vec::new();
    let step = h / 16.0;
    let mut x = 0.0;
    while x < 2.0 * h && x < region {
        breaks.push(x);
        x += step;
    }
    let mut x = 2.0 * h;
    while x < region {
        breaks.push(x);
        x *= 1.08;
    }
    breaks.push(region);
    breaks
}

impl Network {
    pub fn new(params: NetworkParams) -> Result<Self> {
        let derived = DerivedConstants::build(&params)?;
        let scurve = SCurve::from_params(&params);
        let breaks = mass_breaks(params.h, params.region_radius);
        let los_mass = CumulativeIntegral::new(move |x| x * scurve.p_los(x), breaks)?;
        Ok(Self { params, derived, quad: QuadratureSpec::default(), scurve, los_mass: Arc::new(los_mass) })
    }

    pub fn with_quadrature(mut self, quad: QuadratureSpec) -> Self {
        self.quad = quad;
        self
    }

    pub fn reference() -> Self {
        Self::new(NetworkParams::default()).expect("reference parameters are valid")
    }

    pub fn scurve(&self) -> &SCurve {
        &self.scurve
    }

    /// Settings for integrals nested inside other integrals.
    pub fn inner_quad(&self) -> QuadratureSpec {
        QuadratureSpec::adaptive(1e-10, 1e-14)
    }

    /// `int_0^w x P_L(x) dx`, with `w` capped at the region radius.
    pub fn los_mass(&self, w: f64) -> f64 {
        self.los_mass.eval(w)
    }

    pub fn nlos_mass(&self, w: f64) -> f64 {
        let w = w.clamp(0.0, self.params.region_radius);
        0.5 * w * w - self.los_mass(w)
    }

    /// Probability of no LoS ABS within horizontal distance `w`.
    pub fn void_los(&self, w: f64) -> f64 {
        (-2.0 * PI * self.params.lambda_a * self.los_mass(w)).exp()
    }

    /// Probability of no NLoS ABS within horizontal distance `w`.
    pub fn void_nlos(&self, w: f64) -> f64 {
        (-2.0 * PI * self.params.lambda_a * self.nlos_mass(w)).exp()
    }

    /// Probability of no TBS within (horizontal) distance `r`.
    pub fn void_tbs(&self, r: f64) -> f64 {
        (-PI * self.params.lambda_t * r * r).exp()
    }

    pub fn horizontal(&self, slant: f64) -> f64 {
        crate::channel::horizontal_from_slant(slant, self.params.h)
    }

    pub fn slant(&self, horizontal: f64) -> f64 {
        horizontal.hypot(self.params.h)
    }
}
