//! Analytical and Monte Carlo evaluation of a two-tier heterogeneous
//! network: a mmWave terrestrial tier with a LoS-ball blockage model and a
//! NOMA tier of aerial base stations with elevation-dependent LoS links.
//!
//! The analytical engine (`association`, `laplace`, `coverage`, `rate`)
//! and the [`simulator`] share parameters through [`Network`].

pub mod association;
pub mod channel;
pub mod coverage;
pub mod distances;
pub mod error;
pub mod laplace;
pub mod network;
pub mod numerics;
pub mod params;
pub mod rate;
pub mod simulator;
pub mod validation;

pub use association::{assoc_all, AssociationProbs};
pub use coverage::{CoverageMethod, CoverageResult, NomaCase, NomaThresholds};
pub use distances::{Branch, ServingPdfs, TierLabel};
pub use error::{ModelError, Result};
pub use network::Network;
pub use numerics::{QuadratureError, QuadratureSpec, Scheme};
pub use params::{DerivedConstants, NetworkParams, ParamError};
pub use rate::RateResult;
pub use simulator::{run_campaign, AssociationRule, Campaign, Estimate, SimConfig};
pub use validation::{Check, Tolerance};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
