//! Scenario parameters, unit conversion and derived constants.
//!
//! Configuration values are stored as given (dB, dBm); everything the
//! engines consume lives in [`DerivedConstants`] in linear units.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// All scenario inputs. Serialized field names match the configuration
/// file keys; missing keys take the reference values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkParams {
    /// TBS density, points per m^2.
    #[serde(rename = "lambda_T")]
    pub lambda_t: f64,
    /// ABS density, points per m^2.
    #[serde(rename = "lambda_A")]
    pub lambda_a: f64,
    /// S-curve parameters.
    pub a: f64,
    pub b: f64,
    /// ABS altitude, m.
    pub h: f64,
    /// Distance of the paired (fixed) UE from its ABS, m.
    #[serde(rename = "R_f")]
    pub r_f: f64,
    /// mmWave LoS-ball radius, m.
    #[serde(rename = "R_B")]
    pub r_b: f64,
    /// Imperfect-SIC residual coefficient.
    pub beta: f64,
    #[serde(rename = "alpha_N")]
    pub alpha_n: f64,
    #[serde(rename = "alpha_L")]
    pub alpha_l: f64,
    #[serde(rename = "alpha_T")]
    pub alpha_t: f64,
    #[serde(rename = "C_N_dB")]
    pub c_n_db: f64,
    #[serde(rename = "C_L_dB")]
    pub c_l_db: f64,
    #[serde(rename = "C_T_dB")]
    pub c_t_db: f64,
    #[serde(rename = "m_N")]
    pub m_n: u32,
    #[serde(rename = "m_L")]
    pub m_l: u32,
    #[serde(rename = "m_T")]
    pub m_t: u32,
    pub a_m: f64,
    pub a_n: f64,
    #[serde(rename = "P_T_dBm")]
    pub p_t_dbm: f64,
    #[serde(rename = "P_A_dBm")]
    pub p_a_dbm: f64,
    #[serde(rename = "sigma2_T_dBm")]
    pub sigma2_t_dbm: f64,
    #[serde(rename = "sigma2_A_dBm")]
    pub sigma2_a_dbm: f64,
    /// TBS antenna count.
    #[serde(rename = "N_T")]
    pub n_t: u32,
    /// Radius of the simulated disc, m. Also caps every semi-infinite
    /// integral of the analytical engine.
    pub region_radius: f64,
    /// Optional beamwidth overrides (rad); default `sqrt(3 / N_T)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_d: Option<f64>,
}

impl Default for NetworkParams {
    /// The reference scenario used throughout the test suite.
    fn default() -> Self {
        Self {
            lambda_t: 1e-5,
            lambda_a: 2e-6,
            a: 12.08,
            b: 0.11,
            h: 200.0,
            r_f: 220.0,
            r_b: 220.0,
            beta: 0.1,
            alpha_n: 3.0,
            alpha_l: 2.5,
            alpha_t: 2.0,
            c_n_db: 10.0,
            c_l_db: 3.0,
            c_t_db: 3.0,
            m_n: 1,
            m_l: 2,
            m_t: 2,
            a_m: 0.8,
            a_n: 0.2,
            p_t_dbm: 20.0,
            p_a_dbm: 59.0,
            sigma2_t_dbm: -70.0,
            sigma2_a_dbm: -104.0,
            n_t: 4,
            region_radius: 5e4,
            theta_a: None,
            theta_d: None,
        }
    }
}

/// Names accepted by [`NetworkParams::set`] and [`NetworkParams::get`].
pub const FIELD_NAMES: [&str; 25] = [
    "lambda_T",
    "lambda_A",
    "a",
    "b",
    "h",
    "R_f",
    "R_B",
    "beta",
    "alpha_N",
    "alpha_L",
    "alpha_T",
    "C_N_dB",
    "C_L_dB",
    "C_T_dB",
    "m_N",
    "m_L",
    "m_T",
    "a_m",
    "a_n",
    "P_T_dBm",
    "P_A_dBm",
    "sigma2_T_dBm",
    "sigma2_A_dBm",
    "N_T",
    "region_radius",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FieldViolation {
    pub field: &'static str,
    pub value: f64,
    pub reason: &'static str,
}

impl fmt::Display for FieldViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}: {}", self.field, self.value, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("invalid parameters: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<FieldViolation>),
    #[error("unknown parameter `{0}`")]
    UnknownField(String),
    #[error("parameter `{field}` expects a positive integer, got {value}")]
    NotInteger { field: String, value: f64 },
}

impl NetworkParams {
    /// Every invariant violation, one entry per offending field.
    pub fn violations(&self) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        let mut check = |ok: bool, field: &'static str, value: f64, reason: &'static str| {
            if !ok || value.is_nan() {
                out.push(FieldViolation { field, value, reason });
            }
        };
        for (field, value) in [
            ("lambda_T", self.lambda_t),
            ("lambda_A", self.lambda_a),
            ("h", self.h),
            ("R_B", self.r_b),
            ("alpha_N", self.alpha_n),
            ("alpha_L", self.alpha_l),
            ("alpha_T", self.alpha_t),
            ("region_radius", self.region_radius),
            ("b", self.b),
        ] {
            check(value > 0.0 && value.is_finite(), field, value, "must be positive and finite");
        }
        check(self.a > 0.0 && self.a.is_finite(), "a", self.a, "must be positive and finite");
        check(self.r_f >= self.h, "R_f", self.r_f, "fixed UE distance must be at least the altitude h");
        check((0.0..1.0).contains(&self.beta), "beta", self.beta, "must lie in [0, 1)");
        check(self.a_n > 0.0, "a_n", self.a_n, "must be positive");
        check(self.a_m > self.a_n, "a_m", self.a_m, "must exceed a_n");
        check((self.a_m + self.a_n - 1.0).abs() <= 1e-9, "a_m", self.a_m + self.a_n, "a_m + a_n must equal 1");
        for (field, m) in [("m_N", self.m_n), ("m_L", self.m_l), ("m_T", self.m_t), ("N_T", self.n_t)] {
            check(m >= 1, field, m as f64, "must be a positive integer");
        }
        for (field, value) in [
            ("C_N_dB", self.c_n_db),
            ("C_L_dB", self.c_l_db),
            ("C_T_dB", self.c_t_db),
            ("P_T_dBm", self.p_t_dbm),
            ("P_A_dBm", self.p_a_dbm),
            ("sigma2_T_dBm", self.sigma2_t_dbm),
            ("sigma2_A_dBm", self.sigma2_a_dbm),
        ] {
            check(value.is_finite(), field, value, "must be finite");
        }
        check(
            self.region_radius > self.r_b.max(self.r_f),
            "region_radius",
            self.region_radius,
            "must exceed R_B and R_f",
        );
        for (field, theta) in [("theta_a", self.theta_a), ("theta_d", self.theta_d)] {
            if let Some(t) = theta {
                check(t > 0.0, field, t, "beamwidth must be positive");
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ParamError::Invalid(v))
        }
    }

    /// Change the altitude while keeping `R_f / h` fixed.
    pub fn with_altitude(&self, h: f64) -> Self {
        let ratio = self.r_f / self.h;
        Self { h, r_f: ratio * h, ..self.clone() }
    }

    pub fn get(&self, name: &str) -> Result<f64, ParamError> {
        Ok(match name {
            "lambda_T" => self.lambda_t,
            "lambda_A" => self.lambda_a,
            "a" => self.a,
            "b" => self.b,
            "h" => self.h,
            "R_f" => self.r_f,
            "R_B" => self.r_b,
            "beta" => self.beta,
            "alpha_N" => self.alpha_n,
            "alpha_L" => self.alpha_l,
            "alpha_T" => self.alpha_t,
            "C_N_dB" => self.c_n_db,
            "C_L_dB" => self.c_l_db,
            "C_T_dB" => self.c_t_db,
            "m_N" => self.m_n as f64,
            "m_L" => self.m_l as f64,
            "m_T" => self.m_t as f64,
            "a_m" => self.a_m,
            "a_n" => self.a_n,
            "P_T_dBm" => self.p_t_dbm,
            "P_A_dBm" => self.p_a_dbm,
            "sigma2_T_dBm" => self.sigma2_t_dbm,
            "sigma2_A_dBm" => self.sigma2_a_dbm,
            "N_T" => self.n_t as f64,
            "region_radius" => self.region_radius,
            other => return Err(ParamError::UnknownField(other.to_string())),
        })
    }

    /// Set a field by its configuration key. Integer fields reject
    /// non-integral values.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ParamError> {
        let as_count = |value: f64| -> Result<u32, ParamError> {
            if value >= 1.0 && (value - value.round()).abs() < 1e-9 {
                Ok(value.round() as u32)
            } else {
                Err(ParamError::NotInteger { field: name.to_string(), value })
            }
        };
        match name {
            "lambda_T" => self.lambda_t = value,
            "lambda_A" => self.lambda_a = value,
            "a" => self.a = value,
            "b" => self.b = value,
            "h" => self.h = value,
            "R_f" => self.r_f = value,
            "R_B" => self.r_b = value,
            "beta" => self.beta = value,
            "alpha_N" => self.alpha_n = value,
            "alpha_L" => self.alpha_l = value,
            "alpha_T" => self.alpha_t = value,
            "C_N_dB" => self.c_n_db = value,
            "C_L_dB" => self.c_l_db = value,
            "C_T_dB" => self.c_t_db = value,
            "m_N" => self.m_n = as_count(value)?,
            "m_L" => self.m_l = as_count(value)?,
            "m_T" => self.m_t = as_count(value)?,
            "a_m" => self.a_m = value,
            "a_n" => self.a_n = value,
            "P_T_dBm" => self.p_t_dbm = value,
            "P_A_dBm" => self.p_a_dbm = value,
            "sigma2_T_dBm" => self.sigma2_t_dbm = value,
            "sigma2_A_dBm" => self.sigma2_a_dbm = value,
            "N_T" => self.n_t = as_count(value)?,
            "region_radius" => self.region_radius = value,
            other => return Err(ParamError::UnknownField(other.to_string())),
        }
        Ok(())
    }
}

/// Constants derived once per scenario, all in linear units (W, m).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub c_n: f64,
    pub c_l: f64,
    pub c_t: f64,
    pub p_t: f64,
    pub p_a: f64,
    pub sigma2_t: f64,
    pub sigma2_a: f64,
    /// `G_M P_T C_T`
    pub eta_t: f64,
    /// `a_n P_A C_L`
    pub eta_l: f64,
    /// `a_n P_A C_N`
    pub eta_n: f64,
    /// LoS-ABS distance matching the NLoS power at altitude `h`.
    pub l_lh: f64,
    /// Largest LoS-ABS association distance when a TBS is in the ball.
    pub l_lt: f64,
    /// TBS distance matching the LoS-ABS power at `h`.
    pub l_tl: f64,
    /// TBS distance matching the NLoS-ABS power at `h`.
    pub l_tn: f64,
    /// Alzer constants `m (m!)^(-1/m)`.
    pub b_t: f64,
    pub b_l: f64,
    pub b_n: f64,
    pub theta_a: f64,
    pub theta_d: f64,
    pub g_main: f64,
    pub g_side: f64,
    pub p_main: f64,
    pub p_side: f64,
    /// Probability of at least one TBS inside the LoS ball.
    pub q_t: f64,
}

pub fn alzer_constant(m: u32) -> f64 {
    let m_f = m as f64;
    m_f * crate::numerics::factorial(m).powf(-1.0 / m_f)
}

/// Side-lobe gain of the sectorized pattern for an `n`-element array. The
/// closed form turns negative for `n >= 16`; it is floored at zero there.
pub fn side_lobe_gain(n: u32) -> f64 {
    let n = n as f64;
    let root = n.sqrt();
    let s = (3.0 * PI / (2.0 * root)).sin();
    let sqrt3 = 3f64.sqrt();
    ((root - sqrt3 * n * s / (2.0 * PI)) / (root - sqrt3 * s / (2.0 * PI))).max(0.0)
}

impl DerivedConstants {
    pub fn build(params: &NetworkParams) -> Result<Self, ParamError> {
        params.validate()?;
        let p = params;
        let c_n = db_to_linear(p.c_n_db);
        let c_l = db_to_linear(p.c_l_db);
        let c_t = db_to_linear(p.c_t_db);
        let p_t = dbm_to_watts(p.p_t_dbm);
        let p_a = dbm_to_watts(p.p_a_dbm);
        let sigma2_t = dbm_to_watts(p.sigma2_t_dbm);
        let sigma2_a = dbm_to_watts(p.sigma2_a_dbm);

        let default_width = (3.0 / p.n_t as f64).sqrt();
        let theta_a = p.theta_a.unwrap_or(default_width);
        let theta_d = p.theta_d.unwrap_or(default_width);
        let g_main = p.n_t as f64;
        let g_side = side_lobe_gain(p.n_t);
        let p_main = (theta_a / (2.0 * PI) * theta_d / PI).min(1.0);

        let eta_t = g_main * p_t * c_t;
        let eta_l = p.a_n * p_a * c_l;
        let eta_n = p.a_n * p_a * c_n;
        // eta_l / eta_n reduces to C_L / C_N; using the loss ratio keeps the
        // transmit power out of l_lh exactly.
        let l_lh = (c_l / c_n).powf(1.0 / p.alpha_l) * p.h.powf(p.alpha_n / p.alpha_l);
        let l_lt = (eta_l / eta_t).powf(1.0 / p.alpha_l) * p.r_b.powf(p.alpha_t / p.alpha_l);
        let l_tl = (eta_t / eta_l).powf(1.0 / p.alpha_t) * p.h.powf(p.alpha_l / p.alpha_t);
        let l_tn = (eta_t / eta_n).powf(1.0 / p.alpha_t) * p.h.powf(p.alpha_n / p.alpha_t);
        let q_t = -(-PI * p.lambda_t * p.r_b * p.r_b).exp_m1();

        let derived = Self {
            c_n,
            c_l,
            c_t,
            p_t,
            p_a,
            sigma2_t,
            sigma2_a,
            eta_t,
            eta_l,
            eta_n,
            l_lh,
            l_lt,
            l_tl,
            l_tn,
            b_t: alzer_constant(p.m_t),
            b_l: alzer_constant(p.m_l),
            b_n: alzer_constant(p.m_n),
            theta_a,
            theta_d,
            g_main,
            g_side,
            p_main,
            p_side: 1.0 - p_main,
            q_t,
        };
        let mut bad = Vec::new();
        for (field, value) in [
            ("eta_T", eta_t),
            ("eta_L", eta_l),
            ("eta_N", eta_n),
            ("l_Lh", l_lh),
            ("l_LT", l_lt),
            ("l_TL", l_tl),
            ("l_TN", l_tn),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                bad.push(FieldViolation { field, value, reason: "derived constant must be positive and finite" });
            }
        }
        if !(q_t > 0.0 && q_t < 1.0) {
            bad.push(FieldViolation {
                field: "Q_T",
                value: q_t,
                reason: "TBS-in-ball probability must lie strictly between 0 and 1",
            });
        }
        if bad.is_empty() {
            Ok(derived)
        } else {
            Err(ParamError::Invalid(bad))
        }
    }
}
