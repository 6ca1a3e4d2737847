//! Vectorized bootstrap particle filtering over program graphs.
//!
//! The engine advances a whole population of program runs in lockstep,
//! one transition per step: resample by weight, dispatch on guards, run
//! kernels, rescore. State lives in structure-of-arrays form (a row-major
//! store matrix, a checkpoint vector and a weight vector) so the per-step
//! work is a handful of columnar sweeps.
//!
//! Reproducibility is a hard contract here, not an afterthought. Every
//! random decision is drawn from a counter-addressed substream of a single
//! keyed generator, so a (graph, seed, particle count, horizon, scheme)
//! tuple pins the final ensemble bit for bit — across runs, across thread
//! counts, and across the scalar reference runner in [`scalar_pf_run`].

mod ensemble;
mod resample;
mod rng;
mod scalar;
mod vpf;
mod weights;

pub use ensemble::{EngineDiagnostics, ParticleEnsemble};
pub use resample::{resample, ResamplingScheme};
pub use rng::{derive_replicate_seed, pack_substream, RngStream, LANE_KERNEL, LANE_RESAMPLE};
pub use scalar::scalar_pf_run;
pub use vpf::{vpf_init, vpf_run, vpf_run_threaded, vpf_step, EngineError};
pub use weights::{ess, normalize_weights, Normalized, WeightError};
