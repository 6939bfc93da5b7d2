//! Propagation laws and random channel draws for both tiers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::params::{DerivedConstants, NetworkParams};

/// Geometry of an air-to-ground link: horizontal offset, altitude and the
/// slant range between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub horizontal: f64,
    pub altitude: f64,
    pub slant: f64,
}

impl LinkGeometry {
    pub fn new(horizontal: f64, altitude: f64) -> Self {
        Self { horizontal, altitude, slant: horizontal.hypot(altitude) }
    }

    /// Build from a slant range, flooring the horizontal offset at zero.
    pub fn from_slant(slant: f64, altitude: f64) -> Self {
        Self { horizontal: horizontal_from_slant(slant, altitude), altitude, slant }
    }

    /// Elevation angle seen from the ground, degrees.
    pub fn elevation_deg(&self) -> f64 {
        self.altitude.atan2(self.horizontal).to_degrees()
    }
}

#[inline]
pub fn horizontal_from_slant(slant: f64, altitude: f64) -> f64 {
    ((slant - altitude) * (slant + altitude)).max(0.0).sqrt()
}

/// Elevation-angle logistic LoS model.
///
/// `P_L(x) = 1 / (1 + a exp(-b (theta(x) - a)))` with `theta` the elevation
/// angle in degrees, `theta(0) = 90`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SCurve {
    pub a: f64,
    pub b: f64,
    pub h: f64,
}

impl SCurve {
    pub fn from_params(p: &NetworkParams) -> Self {
        Self { a: p.a, b: p.b, h: p.h }
    }

    #[inline]
    pub fn p_los(&self, x: f64) -> f64 {
        let theta = self.h.atan2(x).to_degrees();
        1.0 / (1.0 + self.a * (-self.b * (theta - self.a)).exp())
    }

    #[inline]
    pub fn p_nlos(&self, x: f64) -> f64 {
        1.0 - self.p_los(x)
    }

    /// LoS probability as the horizontal distance grows without bound.
    pub fn p_los_far(&self) -> f64 {
        1.0 / (1.0 + self.a * (self.a * self.b).exp())
    }
}

pub fn p_los(x: f64, params: &NetworkParams) -> f64 {
    SCurve::from_params(params).p_los(x)
}

pub fn p_nlos(x: f64, params: &NetworkParams) -> f64 {
    1.0 - p_los(x, params)
}

/// `r^(-alpha)`, using square roots when `alpha` is a multiple of 1/2.
#[inline]
pub fn inv_pow(r: f64, alpha: f64) -> f64 {
    let twice = 2.0 * alpha;
    if (twice - twice.round()).abs() < 1e-12 && twice.abs() < 64.0 {
        let n = twice.round() as i32;
        r.sqrt().powi(-n)
    } else {
        r.powf(-alpha)
    }
}

/// `r^(-alpha)` from `r^2`, avoiding `powf` when `alpha` is a multiple of 1/2.
#[inline]
pub fn inv_pow_from_square(r2: f64, alpha: f64) -> f64 {
    let twice = 2.0 * alpha;
    if (twice - twice.round()).abs() < 1e-12 && twice.abs() < 64.0 {
        r2.sqrt().sqrt().powi(-(twice.round() as i32))
    } else {
        r2.powf(-0.5 * alpha)
    }
}

/// mmWave path gain `C_T r^(-alpha_T) 1(R_B - r)`; the ball boundary is
/// inside the ball.
pub fn path_loss_t(r: f64, params: &NetworkParams, derived: &DerivedConstants) -> f64 {
    if r <= params.r_b {
        derived.c_t * inv_pow(r, params.alpha_t)
    } else {
        0.0
    }
}

pub fn path_loss_los(r: f64, params: &NetworkParams, derived: &DerivedConstants) -> f64 {
    derived.c_l * inv_pow(r, params.alpha_l)
}

pub fn path_loss_nlos(r: f64, params: &NetworkParams, derived: &DerivedConstants) -> f64 {
    derived.c_n * inv_pow(r, params.alpha_n)
}

/// Slant range where the LoS and NLoS A2G laws cross:
/// `C_L r^(-alpha_L) = C_N r^(-alpha_N)`.
pub fn los_nlos_crossover(derived: &DerivedConstants, params: &NetworkParams) -> f64 {
    (derived.c_n / derived.c_l).powf(1.0 / (params.alpha_n - params.alpha_l))
}

/// One Nakagami-m power gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingDraw {
    pub gain: f64,
    pub shape: u32,
}

/// `Gamma(m, 1/m)` power gain as the scaled sum of `m` unit exponentials,
/// computed with a single logarithm of the product of uniforms.
#[inline]
pub fn gamma_gain<R: Rng + ?Sized>(shape: u32, rng: &mut R) -> f64 {
    let mut prod = 1.0f64;
    for _ in 0..shape {
        // (0, 1]
        prod *= 1.0 - rng.random::<f64>();
    }
    if prod > 0.0 {
        -prod.ln() / shape as f64
    } else {
        // product underflow, only reachable for very large shapes
        (0..shape).map(|_| -(1.0 - rng.random::<f64>()).ln()).sum::<f64>() / shape as f64
    }
}

pub fn sample_fading<R: Rng + ?Sized>(shape: u32, rng: &mut R) -> FadingDraw {
    FadingDraw { gain: gamma_gain(shape.max(1), rng), shape }
}

/// Beamforming gain of an interfering TBS: `G_M` with probability `p_M`.
pub fn sample_interferer_gain<R: Rng + ?Sized>(derived: &DerivedConstants, rng: &mut R) -> f64 {
    if rng.random::<f64>() < derived.p_main {
        derived.g_main
    } else {
        derived.g_side
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reference() -> (NetworkParams, DerivedConstants) {
        let p = NetworkParams::default();
        let d = DerivedConstants::build(&p).unwrap();
        (p, d)
    }

    #[test]
    fn s_curve_limits() {
        let (p, _) = reference();
        let s = SCurve::from_params(&p);
        // 90 degrees overhead: 1 / (1 + 12.08 exp(-0.11 * 77.92))
        assert!((s.p_los(0.0) - 0.9977).abs() < 5e-5, "{}", s.p_los(0.0));
        assert_relative_eq!(s.p_los(1e16), s.p_los_far(), max_relative = 1e-12);
        for x in [0.0, p.h, 10.0 * p.h] {
            assert_relative_eq!(s.p_los(x) + s.p_nlos(x), 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn mmwave_path_loss_ball() {
        let (p, d) = reference();
        assert_eq!(path_loss_t(p.r_b + 1.0, &p, &d), 0.0);
        assert!((path_loss_t(1.0, &p, &d) - 1.9953).abs() < 1e-4);
        assert!(path_loss_t(p.r_b, &p, &d) > 0.0);
    }

    #[test]
    fn crossover_radius_balances_laws() {
        let (p, d) = reference();
        let r = los_nlos_crossover(&d, &p);
        assert_relative_eq!(path_loss_los(r, &p, &d), path_loss_nlos(r, &p, &d), max_relative = 1e-12);
    }

    #[test]
    fn inv_pow_fast_path() {
        for &a in &[2.0, 2.5, 3.0, 3.7] {
            assert_relative_eq!(inv_pow(321.5, a), 321.5f64.powf(-a), max_relative = 1e-13);
        }
    }

    #[test]
    fn inv_pow_from_square_matches_powf() {
        for &a in &[2.0, 2.5, 3.0, 3.7] {
            let r2 = 321.5f64 * 321.5;
            assert_relative_eq!(inv_pow_from_square(r2, a), 321.5f64.powf(-a), max_relative = 1e-13);
        }
    }

    #[test]
    fn link_geometry() {
        let g = LinkGeometry::new(150.0, 200.0);
        assert_relative_eq!(g.slant, 250.0);
        assert_relative_eq!(LinkGeometry::from_slant(250.0, 200.0).horizontal, 150.0, max_relative = 1e-12);
        assert_relative_eq!(LinkGeometry::new(0.0, 50.0).elevation_deg(), 90.0);
    }

    #[test]
    fn exponential_fading_has_unit_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let mean = (0..n).map(|_| sample_fading(1, &mut rng).gain).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.005, "{mean}");
    }

    #[test]
    fn gamma_two_variance_is_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_fading(2, &mut rng).gain).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 0.5).abs() < 0.01, "{var}");
    }

    #[test]
    fn samplers_are_deterministic() {
        let (_, d) = reference();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100)
                .map(|_| (sample_fading(2, &mut rng).gain, sample_interferer_gain(&d, &mut rng)))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
    }

    #[test]
    fn main_lobe_frequency() {
        let (_, d) = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| sample_interferer_gain(&d, &mut rng) == d.g_main).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - d.p_main).abs() < 0.001, "{freq}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn p_los_monotone(x in 0.0f64..5e4, dx in 0.0f64..1e3, h in 10.0f64..1e3, dh in 0.0f64..500.0) {
                let s = SCurve { a: 12.08, b: 0.11, h };
                prop_assert!(s.p_los(x + dx) <= s.p_los(x) + 1e-15);
                let higher = SCurve { h: h + dh, ..s };
                prop_assert!(higher.p_los(x) >= s.p_los(x) - 1e-15);
            }

            #[test]
            fn mmwave_loss_monotone(r in 0.5f64..220.0, dr in 0.0f64..300.0) {
                let (p, d) = reference();
                prop_assert!(path_loss_t(r + dr, &p, &d) <= path_loss_t(r, &p, &d));
                if r + dr > p.r_b {
                    prop_assert_eq!(path_loss_t(r + dr, &p, &d), 0.0);
                }
            }
        }
    }
}
