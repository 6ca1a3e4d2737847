//! Posterior estimates with certified bounds, computed from particle
//! populations.
//!
//! The filter approximates the time-t distribution of a program's runs;
//! this crate turns that population into the quantity users actually ask
//! for — the expectation of a target function over *terminated* runs —
//! and brackets it: a lower estimate β_L from the terminated weight, and
//! an upper estimate β_U that charges all still-live weight to the
//! target's bound. The bracket collapses to a point when every
//! nonzero-weight particle has terminated.

mod bounds;
mod report;
mod target;

use thiserror::Error;

pub use bounds::{bounds, filtering_expectation, termination_mass, Bounds};
pub use report::{
    replicate, run_estimate, EstimateReport, ReplicateReport, ReplicateSummary, RunConfig, Spread,
    CSV_HEADER,
};
pub use target::TargetFunction;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("no terminated weight at horizon {t}; increase t")]
    NoTerminatedWeight { t: usize },
    #[error("target must be nonnegative; got {value} on particle {index}")]
    NegativeTarget { index: usize, value: f64 },
    #[error("target value {value} on particle {index} exceeds its declared bound {bound}")]
    BoundExceeded {
        index: usize,
        value: f64,
        bound: f64,
    },
    #[error("target bound must be nonnegative (got {bound})")]
    BadBound { bound: f64 },
    #[error(transparent)]
    Engine(#[from] ppg_engine::EngineError),
}
