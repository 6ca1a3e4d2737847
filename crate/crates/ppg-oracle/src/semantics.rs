//! Exact posterior quantities computed from an enumeration table.
//!
//! Everything here is plain rational arithmetic over the table rows:
//! the normalized target mass, the termination correction, and the
//! certified interval the sampler is later checked against.

use crate::enumerate::ExactTable;
use crate::value::{eval_q, QVal};
use crate::OracleError;
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use ppg_estimator::TargetFunction;

/// Exact counterparts of the sampler's reported quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactBounds {
    /// Lower bound β_L = Σ_terminated p·w·h / Σ_all p·w.
    pub beta_l: BigRational,
    /// Upper bound; `None` encodes +∞ (unbounded target, mass not all in).
    pub beta_u: Option<BigRational>,
    /// Termination correction α_t = total mass / terminated mass (≥ 1).
    pub alpha_t: BigRational,
    /// Share of normalized weight sitting at the final checkpoint.
    pub termination_mass: BigRational,
    /// Unnormalized Σ p·w·h over terminated rows.
    pub target_weight: BigRational,
    /// Unnormalized Σ p·w over all rows.
    pub total_weight: BigRational,
    /// Unnormalized Σ p·w over terminated rows.
    pub terminated_weight: BigRational,
}

impl ExactBounds {
    /// The posterior expectation when the interval has collapsed
    /// (all weight terminated), otherwise `None`.
    pub fn value_if_exact(&self) -> Option<&BigRational> {
        match &self.beta_u {
            Some(u) if *u == self.beta_l => Some(&self.beta_l),
            _ => None,
        }
    }

    pub fn beta_l_f64(&self) -> f64 {
        self.beta_l.to_f64().unwrap_or(f64::NAN)
    }

    /// Upper bound as a float, +∞ when unbounded.
    pub fn beta_u_f64(&self) -> f64 {
        match &self.beta_u {
            Some(u) => u.to_f64().unwrap_or(f64::NAN),
            None => f64::INFINITY,
        }
    }

    pub fn alpha_t_f64(&self) -> f64 {
        self.alpha_t.to_f64().unwrap_or(f64::NAN)
    }
}

/// Compute the exact bounds for `target` from an enumeration table.
pub fn exact_semantics(
    table: &ExactTable,
    target: &TargetFunction,
) -> Result<ExactBounds, OracleError> {
    let nil = table.nil();
    let mut num = BigRational::zero();
    let mut den_all = BigRational::zero();
    let mut den_term = BigRational::zero();

    for row in &table.rows {
        let mass = &row.probability * &row.weight;
        den_all += &mass;
        if row.checkpoint != nil {
            continue;
        }
        den_term += &mass;
        if mass.is_zero() {
            continue;
        }
        let h = match eval_q(target.h(), &row.store)? {
            QVal::Q(h) => h,
            QVal::PosInf => {
                return Err(OracleError::NotEnumerable(
                    "target function is infinite on a terminated state".into(),
                ))
            }
            QVal::NegInf => {
                return Err(OracleError::NegativeTarget {
                    value: "-inf".into(),
                })
            }
        };
        if h.is_negative() {
            return Err(OracleError::NegativeTarget {
                value: h.to_string(),
            });
        }
        if let Some(m) = target.bound() {
            // m is finite by construction of TargetFunction.
            let m = BigRational::from_float(m).expect("finite bound");
            if h > m {
                return Err(OracleError::NotEnumerable(format!(
                    "target value {h} exceeds declared bound {m}"
                )));
            }
        }
        num += mass * h;
    }

    if den_term.is_zero() {
        return Err(OracleError::NoTerminatedWeight { t: table.horizon });
    }

    let beta_l = &num / &den_all;
    let alpha_t = &den_all / &den_term;
    let termination_mass = &den_term / &den_all;
    let beta_u = if den_all == den_term {
        // All mass has terminated: the interval collapses even when the
        // target is unbounded.
        Some(beta_l.clone())
    } else {
        target.bound().map(|m| {
            let m = BigRational::from_float(m).expect("finite bound");
            &beta_l * &alpha_t + m * (&alpha_t - BigRational::one())
        })
    };

    Ok(ExactBounds {
        beta_l,
        beta_u,
        alpha_t,
        termination_mass,
        target_weight: num,
        total_weight: den_all,
        terminated_weight: den_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::enumerate;
    use num::BigInt;
    use ppg_core::{
        DistributionSpec, Expr, KernelAction, Ppg, ScoreSpec, Step, Transition,
    };

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn flip(target: usize, p: f64) -> KernelAction {
        KernelAction {
            steps: vec![Step::Sample {
                target,
                dist: DistributionSpec::Bernoulli { p: Expr::lit(p) },
            }],
        }
    }

    /// flip c; if c != 0 { flip d; condition on d = 1 }; return c.
    fn two_coin(with_observe: bool) -> Ppg {
        let scores = if with_observe {
            vec![(3, ScoreSpec::Pred(Expr::var(1).eq(Expr::lit(1.0))))]
        } else {
            vec![]
        };
        Ppg::new(
            vec!["c".into(), "d".into()],
            vec!["start".into(), "branch".into(), "nil".into(), "obs".into()],
            vec![
                Transition {
                    source: 0,
                    guard: Expr::truth(),
                    kernel: flip(0, 0.5),
                    target: 1,
                },
                Transition {
                    source: 1,
                    guard: Expr::var(0).eq(Expr::lit(0.0)),
                    kernel: KernelAction::identity(),
                    target: 2,
                },
                Transition {
                    source: 1,
                    guard: Expr::var(0).eq(Expr::lit(0.0)).not(),
                    kernel: flip(1, 0.5),
                    target: 3,
                },
                Transition {
                    source: 3,
                    guard: Expr::truth(),
                    kernel: KernelAction::identity(),
                    target: 2,
                },
                Transition {
                    source: 2,
                    guard: Expr::truth(),
                    kernel: KernelAction::identity(),
                    target: 2,
                },
            ],
            2,
            scores,
        )
        .unwrap()
    }

    #[test]
    fn conditioned_coin_is_exactly_one_third() {
        let g = two_coin(true);
        let table = enumerate(&g, 0, 4).unwrap();
        let target = TargetFunction::bounded(Expr::var(0), 1.0).unwrap();
        let b = exact_semantics(&table, &target).unwrap();
        assert_eq!(b.beta_l, ratio(1, 3));
        assert_eq!(b.beta_u, Some(ratio(1, 3)));
        assert_eq!(b.alpha_t, BigRational::one());
        assert_eq!(b.termination_mass, BigRational::one());
        assert_eq!(b.target_weight, ratio(1, 4));
        assert_eq!(b.total_weight, ratio(3, 4));
        assert_eq!(b.value_if_exact(), Some(&ratio(1, 3)));
        assert_eq!(b.beta_l_f64(), 1.0 / 3.0);
    }

    #[test]
    fn without_conditioning_the_coin_is_fair() {
        let g = two_coin(false);
        let table = enumerate(&g, 0, 4).unwrap();
        let target = TargetFunction::bounded(Expr::var(0), 1.0).unwrap();
        let b = exact_semantics(&table, &target).unwrap();
        assert_eq!(b.beta_l, ratio(1, 2));
        assert_eq!(b.beta_u, Some(ratio(1, 2)));
        assert_eq!(b.total_weight, BigRational::one());
    }

    /// Geometric stopping: keep flipping until heads; target [n >= 2].
    fn geometric() -> Ppg {
        Ppg::new(
            vec!["c".into(), "n".into()],
            vec!["loop".into(), "nil".into()],
            vec![
                Transition {
                    source: 0,
                    guard: Expr::var(0).eq(Expr::lit(0.0)),
                    kernel: KernelAction {
                        steps: vec![
                            Step::Sample {
                                target: 0,
                                dist: DistributionSpec::Bernoulli { p: Expr::lit(0.5) },
                            },
                            Step::Assign {
                                target: 1,
                                value: Expr::var(1).add(Expr::lit(1.0)),
                            },
                        ],
                    },
                    target: 0,
                },
                Transition {
                    source: 0,
                    guard: Expr::var(0).eq(Expr::lit(0.0)).not(),
                    kernel: KernelAction::identity(),
                    target: 1,
                },
                Transition {
                    source: 1,
                    guard: Expr::truth(),
                    kernel: KernelAction::identity(),
                    target: 1,
                },
            ],
            1,
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn bounds_tighten_monotonically_with_horizon() {
        let g = geometric();
        let target =
            TargetFunction::bounded(Expr::var(1).ge(Expr::lit(2.0)), 1.0).unwrap();
        let mut prev: Option<ExactBounds> = None;
        for t in 3..=10 {
            let table = enumerate(&g, 0, t).unwrap();
            let b = exact_semantics(&table, &target).unwrap();
            assert!(b.alpha_t >= BigRational::one());
            let u = b.beta_u.clone().unwrap();
            assert!(b.beta_l <= u);
            if let Some(p) = &prev {
                assert!(b.beta_l >= p.beta_l, "lower bound regressed at t={t}");
                assert!(u <= p.beta_u.clone().unwrap(), "upper bound grew at t={t}");
            }
            prev = Some(b);
        }
        // P(n >= 2) = 1/2 exactly; by t=10 both bounds are within 2^-7.
        let last = prev.unwrap();
        let gap = last.beta_u.unwrap() - last.beta_l;
        assert!(gap < ratio(1, 128));
    }

    #[test]
    fn unbounded_target_has_open_upper_bound_until_termination() {
        let g = geometric();
        let target = TargetFunction::new(Expr::var(1));
        let table = enumerate(&g, 0, 4).unwrap();
        let b = exact_semantics(&table, &target).unwrap();
        assert!(b.beta_u.is_none());
        assert_eq!(b.beta_u_f64(), f64::INFINITY);
        assert!(b.alpha_t > BigRational::one());
        assert!(b.value_if_exact().is_none());
    }

    #[test]
    fn trace_form_equals_filtering_form() {
        // The quotient Σp·w·h / Σp·w must equal the expectation of h
        // under the self-normalized weighted measure, recomputed directly
        // from the rows. With exact rationals the two agree identically.
        let g = two_coin(true);
        let table = enumerate(&g, 0, 4).unwrap();
        let target = TargetFunction::bounded(Expr::var(0), 1.0).unwrap();
        let b = exact_semantics(&table, &target).unwrap();

        let mut num = BigRational::zero();
        let mut den = BigRational::zero();
        for row in &table.rows {
            let mass = &row.probability * &row.weight;
            den += &mass;
            if row.checkpoint == table.nil() && !mass.is_zero() {
                let h = match eval_q(target.h(), &row.store).unwrap() {
                    QVal::Q(h) => h,
                    _ => unreachable!(),
                };
                num += mass * h;
            }
        }
        assert_eq!(b.beta_l, num / den);
    }

    #[test]
    fn no_terminated_weight_is_an_error() {
        let g = geometric();
        let target = TargetFunction::new(Expr::var(1));
        // At t=1 we are still at the loop head.
        let table = enumerate(&g, 0, 1).unwrap();
        let err = exact_semantics(&table, &target).unwrap_err();
        assert_eq!(
            err.to_string(),
            "no terminated weight at horizon 1; increase t"
        );
    }

    #[test]
    fn negative_targets_are_rejected() {
        let g = two_coin(true);
        let table = enumerate(&g, 0, 4).unwrap();
        let target = TargetFunction::new(Expr::var(0).sub(Expr::lit(5.0)));
        let err = exact_semantics(&table, &target).unwrap_err();
        assert!(matches!(err, OracleError::NegativeTarget { .. }));
    }
}
