//! Stochastic cascading failures on directed shareholding networks.
//!
//! Edges run from investee to shareholder: when a firm fails, each of its
//! shareholders receives a failure-probability impulse proportional to the
//! per-step failure rate and inversely proportional to how many investees the
//! shareholder holds. Past impulses decay by the per-step discount rate.

mod country;
mod engine;
mod fmx;
mod params;
mod sweep;

pub use country::{country_sweep, write_country_csv, CountryMetrics};
pub use engine::{
    init_shock, update_probability, CascadeEngine, CascadeGraph, CascadeMetrics, CascadeState, FailureMatrix,
    FailureRecord, RunOutput, DEFAULT_BIT_BUDGET,
};
pub use fmx::{read_fmx, write_fmx, FMX_MAGIC};
pub use params::{derive_step_params, CascadeParams, StepParams, DEFAULT_STEPS};
pub use sweep::{default_alpha_grid, default_gamma_grid, sweep, write_sweep_csv, SweepCell, SweepConfig, SweepRow, SweepTable};
