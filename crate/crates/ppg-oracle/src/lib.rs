//! Exact enumeration oracle for finite, discrete graphs.
//!
//! Everything the sampler estimates, this crate computes exactly:
//! trajectories are enumerated depth by depth in arbitrary-precision
//! rational arithmetic, merged per reachable (store, checkpoint) state,
//! and reduced to the same certified interval the estimator reports.
//! That makes it the ground truth the statistical test-suite checks the
//! sampler against — no tolerance games, just equality of rationals on
//! the oracle side and standard-error windows on the sampler side.
//!
//! Every float appearing in a model is a dyadic rational, so conversion
//! into the exact domain is lossless; the float evaluator's conventions
//! for infinities and division by zero are mirrored case by case.
//! Models with continuous kernels or irrational intermediates are
//! rejected as not enumerable rather than silently approximated.

mod enumerate;
mod semantics;
mod value;

pub use enumerate::{enumerate, enumerate_with_limit, ExactRow, ExactTable};
pub use semantics::{exact_semantics, ExactBounds};
pub use value::{eval_q, qadd, qdiv, qmul, qsqrt, qsub, QVal};

use ppg_core::CheckpointId;
use thiserror::Error;

/// Errors from exact enumeration and evaluation.
#[derive(Debug, Error)]
pub enum OracleError {
    /// The model leaves the finitely enumerable fragment.
    #[error("model not enumerable: {0}")]
    NotEnumerable(String),
    /// No normalized weight reached the final checkpoint by the horizon.
    #[error("no terminated weight at horizon {t}; increase t")]
    NoTerminatedWeight { t: usize },
    /// The target function took a negative value on a terminated state.
    #[error("target function is negative ({value}) on a terminated state")]
    NegativeTarget { value: String },
    /// The horizon must be at least 1.
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    /// The start checkpoint is out of range.
    #[error("start checkpoint {start} out of range (graph has {count})")]
    BadStart { start: CheckpointId, count: usize },
    /// The per-depth state set outgrew the configured cap.
    #[error("state set exceeded {limit} distinct states at depth {depth}")]
    StateLimit { limit: usize, depth: usize },
}
