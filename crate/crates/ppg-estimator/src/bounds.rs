//! Filtering expectations, termination mass, and the certified bounds.
//!
//! For a population at time t the estimator reports
//!
//!   β_L = Σ_j Ŵ_j · h(row_j) · [Z_j = nil]
//!
//! together with the termination mass τ = Σ_j Ŵ_j · [Z_j = nil] and the
//! correction factor α = 1/τ. The posterior expectation of h over
//! terminated runs is then certified to lie in
//!
//!   β_L ≤ value ≤ β_L · α + M · (α − 1) = β_U,
//!
//! where M bounds h. When every nonzero-weight particle has terminated the
//! correction vanishes (α = 1) and the interval collapses: β_U = β_L, even
//! for unbounded targets. With live weight remaining and no finite M, β_U
//! is +∞ — an honest "no upper certificate yet".

use crate::target::TargetFunction;
use crate::EstimatorError;
use ppg_core::{eval_expr, CheckpointId, Expr};
use ppg_engine::{normalize_weights, ParticleEnsemble};

/// Σ_j Ŵ_j · h(row_j) over the whole population (terminated or not), with
/// Ŵ the normalized weights. All-zero weight vectors fall back to uniform,
/// mirroring the engine's resampling fallback.
pub fn filtering_expectation(ens: &ParticleEnsemble, h: &Expr) -> f64 {
    let norm = normalize_weights(ens.weights())
        .expect("engine weights are finite, nonnegative, nonempty");
    let mut acc = 0.0;
    for (i, (row, _, _)) in ens.particles().enumerate() {
        let w = norm.weights[i];
        if w > 0.0 {
            acc += w * eval_expr(h, row);
        }
    }
    acc
}

/// Normalized weight sitting on terminated particles: Σ_j Ŵ_j · [Z_j = nil].
pub fn termination_mass(ens: &ParticleEnsemble, nil: CheckpointId) -> f64 {
    // Summed from the live side so that "all terminated" yields exactly 1
    // regardless of rounding in the terminated partial sums.
    1.0 - live_mass(ens, nil)
}

fn live_mass(ens: &ParticleEnsemble, nil: CheckpointId) -> f64 {
    let norm = normalize_weights(ens.weights())
        .expect("engine weights are finite, nonnegative, nonempty");
    ens.checkpoints()
        .iter()
        .zip(norm.weights.iter())
        .filter(|(&z, _)| z != nil)
        .map(|(_, &w)| w)
        .sum()
}

/// The certified-interval summary for one ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub beta_l: f64,
    /// `None` encodes +∞ (live weight remains and the target is unbounded).
    pub beta_u: Option<f64>,
    /// Correction factor 1/termination_mass; ≥ 1, and 1 exactly when all
    /// nonzero weight has terminated.
    pub alpha_t: f64,
    pub termination_mass: f64,
    /// Effective sample size of the final weight vector.
    pub ess: f64,
}

/// Compute the certified interval for `target` on a time-t population.
///
/// Errors when no weight has terminated (the interval is vacuous at this
/// horizon), when the target goes negative on an evaluated row, or when it
/// exceeds its declared bound.
pub fn bounds(
    ens: &ParticleEnsemble,
    nil: CheckpointId,
    target: &TargetFunction,
) -> Result<Bounds, EstimatorError> {
    let norm = normalize_weights(ens.weights())
        .expect("engine weights are finite, nonnegative, nonempty");
    let mut live = 0.0;
    let mut beta_l = 0.0;
    let mut any_terminated = false;
    for (i, (row, z, _)) in ens.particles().enumerate() {
        let w = norm.weights[i];
        if w == 0.0 {
            continue;
        }
        if z != nil {
            live += w;
            continue;
        }
        any_terminated = true;
        let value = eval_expr(target.h(), row);
        if value < 0.0 {
            return Err(EstimatorError::NegativeTarget { index: i, value });
        }
        if let Some(m) = target.bound() {
            if value > m {
                return Err(EstimatorError::BoundExceeded {
                    index: i,
                    value,
                    bound: m,
                });
            }
        }
        beta_l += w * value;
    }
    if !any_terminated || live >= 1.0 {
        return Err(EstimatorError::NoTerminatedWeight { t: ens.step() });
    }
    let termination_mass = 1.0 - live;
    let alpha_t = 1.0 / termination_mass;
    let beta_u = if live == 0.0 {
        // Exact case: every nonzero-weight particle has terminated, the
        // correction term vanishes identically (even for unbounded M).
        Some(beta_l)
    } else {
        target.bound().map(|m| beta_l * alpha_t + m * (alpha_t - 1.0))
    };
    let ess = ppg_engine::ess(ens.weights()).expect("nonzero weight exists");
    Ok(Bounds {
        beta_l,
        beta_u,
        alpha_t,
        termination_mass,
        ess,
    })
}
