//! Deterministic, parallel Monte Carlo estimation of bit error rates,
//! outage probabilities and ergodic rates.

pub mod config;
pub mod engine;
pub mod stats;
pub mod sweep;

pub use config::{Metric, Scheme, SimConfig, Stopping};
pub use engine::{simulate_point, Tally};
pub use sweep::{
    analytic_companion, run_ber_point, run_outage_point, run_outage_point_checked, run_rate_point,
    run_sweep, run_sweep_with_progress, Companion, CompanionKind, PointEstimate, SweepResult, UserKey,
};
