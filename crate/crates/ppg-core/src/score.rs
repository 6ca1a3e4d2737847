//! Per-checkpoint scores (conditioning potentials).
//!
//! Every checkpoint carries a score in [0, 1] that multiplies into a
//! trajectory's weight on arrival. `One` is the neutral score; `Pred`
//! is an indicator; `DensityRatio` divides a distribution's density at a
//! point by a modeler-supplied normalizer (the modal density, for soft
//! likelihood-style conditioning); `Clamped` truncates an arbitrary
//! expression into [0, 1]; `Product` combines several scores applied at the
//! same checkpoint (e.g. several simultaneous observations).
//!
//! Evaluation is total and always lands in [0, 1]: values that would exceed
//! 1 are clamped and the clamp is counted in [`ScoreStats`], which runs
//! surface as a diagnostic.

use crate::dist::{density, DistributionSpec};
use crate::expr::{eval_expr, Expr};
use crate::store::xdiv;
use std::fmt;

/// Score attached to a checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub enum ScoreSpec {
    /// Neutral: weight 1 on every store.
    One,
    /// Indicator of a predicate-shaped expression (hard conditioning).
    Pred(Expr),
    /// Arbitrary expression, truncated into [0, 1].
    Clamped(Expr),
    /// `density(dist, at) / normalizer`, clamped to at most 1.
    DensityRatio {
        dist: DistributionSpec,
        at: Expr,
        normalizer: Expr,
    },
    /// Product of component scores; stays in [0, 1] since each factor does.
    Product(Vec<ScoreSpec>),
}

impl ScoreSpec {
    pub fn is_one(&self) -> bool {
        matches!(self, ScoreSpec::One)
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            ScoreSpec::One => None,
            ScoreSpec::Pred(e) | ScoreSpec::Clamped(e) => e.max_var(),
            ScoreSpec::DensityRatio {
                dist,
                at,
                normalizer,
            } => [dist.max_var(), at.max_var(), normalizer.max_var()]
                .into_iter()
                .flatten()
                .max(),
            ScoreSpec::Product(parts) => parts.iter().filter_map(|s| s.max_var()).max(),
        }
    }
}

/// Counters for score evaluations that needed the clamp. Aggregated per run
/// and reported as a diagnostic; a nonzero count usually means the
/// `density_ratio` normalizer is smaller than the modal density.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScoreStats {
    /// Evaluations whose raw value exceeded 1 before clamping.
    pub clamped_high: u64,
    /// Evaluations whose raw value was negative before clamping.
    pub clamped_low: u64,
}

impl ScoreStats {
    pub fn merge(&mut self, other: ScoreStats) {
        self.clamped_high += other.clamped_high;
        self.clamped_low += other.clamped_low;
    }
}

fn clamp01(raw: f64, stats: &mut ScoreStats) -> f64 {
    if raw > 1.0 {
        stats.clamped_high += 1;
        1.0
    } else if raw < 0.0 {
        stats.clamped_low += 1;
        0.0
    } else {
        raw
    }
}

/// Evaluate a score spec on a store, recording clamps.
pub fn eval_score(spec: &ScoreSpec, v: &[f64], stats: &mut ScoreStats) -> f64 {
    match spec {
        ScoreSpec::One => 1.0,
        ScoreSpec::Pred(e) | ScoreSpec::Clamped(e) => clamp01(eval_expr(e, v), stats),
        ScoreSpec::DensityRatio {
            dist,
            at,
            normalizer,
        } => {
            let point = eval_expr(at, v);
            let d = density(dist, v, point);
            let n = eval_expr(normalizer, v);
            clamp01(xdiv(d, n), stats)
        }
        ScoreSpec::Product(parts) => {
            let mut acc = 1.0;
            for part in parts {
                acc *= eval_score(part, v, stats);
                if acc == 0.0 {
                    break;
                }
            }
            acc
        }
    }
}

/// Raw (pre-clamp) value, used by validation to report range violations.
/// `Product` reports the product of the raw factors.
pub fn eval_score_raw(spec: &ScoreSpec, v: &[f64]) -> f64 {
    match spec {
        ScoreSpec::One => 1.0,
        ScoreSpec::Pred(e) | ScoreSpec::Clamped(e) => eval_expr(e, v),
        ScoreSpec::DensityRatio {
            dist,
            at,
            normalizer,
        } => {
            let point = eval_expr(at, v);
            xdiv(density(dist, v, point), eval_expr(normalizer, v))
        }
        ScoreSpec::Product(parts) => parts.iter().map(|p| eval_score_raw(p, v)).product(),
    }
}

impl fmt::Display for ScoreSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreSpec::One => write!(f, "1"),
            ScoreSpec::Pred(e) => write!(f, "[{e}]"),
            ScoreSpec::Clamped(e) => write!(f, "clamp01({e})"),
            ScoreSpec::DensityRatio {
                dist,
                at,
                normalizer,
            } => write!(f, "{dist}({at}) / {normalizer}"),
            ScoreSpec::Product(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}
