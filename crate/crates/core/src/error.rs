use thiserror::Error;

use crate::distances::TierLabel;
use crate::numerics::QuadratureError;
use crate::params::ParamError;

/// Errors raised by the analytical engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("{what}: r = {r} m violates {condition}")]
    Domain { what: &'static str, r: f64, condition: &'static str },
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("tier {0:?} has zero association probability")]
    UndefinedTier(TierLabel),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error("closed form unavailable: {0}")]
    ClosedFormUnavailable(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
