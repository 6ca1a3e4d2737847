//! Target functions: what the posterior expectation is taken of.
//!
//! A target is a nonnegative function of the final store, evaluated only on
//! terminated particles (its support is restricted to termination by
//! construction — the estimator multiplies by the termination indicator).
//! An optional finite bound `M` on the target tightens the upper estimate;
//! without one the upper estimate degenerates to +∞ whenever some weight
//! has not terminated yet.

use crate::EstimatorError;
use ppg_core::{is_predicate, Expr};

#[derive(Clone, Debug, PartialEq)]
pub struct TargetFunction {
    h: Expr,
    /// Finite upper bound for h, if one is known. `None` means +∞.
    bound: Option<f64>,
}

impl TargetFunction {
    /// Target with an automatic bound: indicator-shaped expressions are
    /// bounded by 1, everything else gets +∞ until the caller says better.
    pub fn new(h: Expr) -> Self {
        let bound = if is_predicate(&h) { Some(1.0) } else { None };
        TargetFunction { h, bound }
    }

    /// Target with an explicit bound; `+∞` is allowed and means unbounded.
    pub fn bounded(h: Expr, bound: f64) -> Result<Self, EstimatorError> {
        if bound.is_nan() || bound < 0.0 {
            return Err(EstimatorError::BadBound { bound });
        }
        let bound = if bound.is_finite() { Some(bound) } else { None };
        Ok(TargetFunction { h, bound })
    }

    pub fn h(&self) -> &Expr {
        &self.h
    }

    /// `None` encodes +∞.
    pub fn bound(&self) -> Option<f64> {
        self.bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicates_get_unit_bound() {
        let t = TargetFunction::new(Expr::var(0).gt(Expr::lit(0.0)));
        assert_eq!(t.bound(), Some(1.0));
        let t = TargetFunction::new(Expr::var(0));
        assert_eq!(t.bound(), None);
    }

    #[test]
    fn explicit_bounds_are_validated() {
        assert!(TargetFunction::bounded(Expr::var(0), -1.0).is_err());
        assert!(TargetFunction::bounded(Expr::var(0), f64::NAN).is_err());
        let unbounded = TargetFunction::bounded(Expr::var(0), f64::INFINITY).unwrap();
        assert_eq!(unbounded.bound(), None);
        let two = TargetFunction::bounded(Expr::var(0), 2.0).unwrap();
        assert_eq!(two.bound(), Some(2.0));
    }
}
