//! Core types for probabilistic program graphs (PPGs).
//!
//! A PPG is a finite control-flow graph over *checkpoints*, with guarded
//! probabilistic kernels on the edges and a per-checkpoint score in [0, 1]
//! used for conditioning. Program state is a [`Store`] — a fixed-width
//! vector of extended reals — and the pair (store, checkpoint) is a
//! [`ParticleState`]. Trajectories start at a designated checkpoint with the
//! all-zero store, pick at each step the unique transition whose guard holds
//! (guards partition by construction), run its kernel, and accumulate the
//! product of the scores of the checkpoints they visit. The distinguished
//! `nil` checkpoint is absorbing and marks termination.
//!
//! Everything here is deterministic given the caller's random generator
//! state; [`kernel_step`] is the only effectful operation and the effect is
//! confined to advancing that generator.

mod dist;
mod expr;
mod json;
mod kernel;
mod ppg;
mod score;
mod store;
mod validate;

pub use dist::{density, sample_dist, DistributionSpec};
pub use expr::{eval_expr, eval_expr_sanitized, is_predicate, CmpOp, Expr};
pub use json::{ppg_from_json, ppg_to_json, ppg_to_json_string, JsonError};
pub use kernel::{kernel_step, kernel_step_in_place, KernelAction, Step};
pub use ppg::{score_at, score_at_with, CheckpointId, ParticleState, Ppg, PpgError, Transition};
pub use score::{eval_score, eval_score_raw, ScoreSpec, ScoreStats};
pub use store::{sanitize, xadd, xdiv, xmul, xsqrt, xsub, Store, StoreError};
pub use validate::{validate_ppg, ValidationReport, Violation};
