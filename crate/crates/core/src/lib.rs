//! Interfirm network toolkit.
//!
//! Builds temporal co-patenting and shareholding networks, measures shared and
//! transferred information between their link-formation histories, and runs
//! stochastic cascading-failure simulations on directed shareholding networks.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! bottom of this file fix the scalar to `f64`, which is what the CLI uses.

pub mod cascade;
pub mod error;
pub mod graph;
pub mod infodyn;
pub mod overlap;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default scalar used by the command-line pipeline.
pub type Real = f64;

pub type StepParams = cascade::StepParams<Real>;
pub type CascadeParams = cascade::CascadeParams<Real>;
pub type CascadeMetrics = cascade::CascadeMetrics<Real>;
pub type CascadeEngine<'g> = cascade::CascadeEngine<'g, Real>;
pub type SweepTable = cascade::SweepTable<Real>;
pub type InfoResult = infodyn::InfoResult<Real>;
pub type AggregateResult = infodyn::AggregateResult<Real>;
