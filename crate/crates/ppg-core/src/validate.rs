//! Semantic graph validation.
//!
//! Construction already guarantees indices are in range; this pass checks
//! the properties that need evaluation, reporting violations instead of
//! erroring:
//!
//! * `nil` shape — exactly one outgoing transition, a `true`-guarded
//!   identity self-loop, and the neutral score;
//! * guard partition — the guards leaving each checkpoint are 0/1-valued
//!   and sum to exactly 1 on every store. Proved syntactically when the
//!   outgoing guards are a single `true` or a complementary pair
//!   `{p, !p}`; otherwise checked statistically on sampled stores;
//! * score range — every non-neutral score evaluates (pre-clamp) into
//!   [0, 1] on sampled stores.
//!
//! Sampled stores come from a fixed mixture designed to hit the awkward
//! corners: per entry, 20% exactly 0, 30% small integers in [-3, 3], 20%
//! standard-ish Gaussians scaled by 10, 20% uniform over ±1e6, 10% ±∞.

use crate::expr::{eval_expr, is_predicate, Expr};
use crate::ppg::{CheckpointId, Ppg};
use crate::score::eval_score_raw;
use rand::{Rng, SeedableRng};
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// `nil` must have exactly one outgoing transition: the true-guarded
    /// identity self-loop.
    NilShape { detail: String },
    /// `nil` must carry the neutral score.
    NilScore,
    /// Guards leaving `checkpoint` summed to `sum` (expected exactly 1) on
    /// a sampled store.
    GuardPartition {
        checkpoint: CheckpointId,
        store: Vec<f64>,
        sum: f64,
    },
    /// A guard evaluated to something other than 0 or 1.
    GuardNotIndicator {
        checkpoint: CheckpointId,
        transition: usize,
        store: Vec<f64>,
        value: f64,
    },
    /// A non-neutral score evaluated (pre-clamp) outside [0, 1].
    ScoreRange {
        checkpoint: CheckpointId,
        store: Vec<f64>,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NilShape { detail } => write!(f, "nil checkpoint malformed: {detail}"),
            Violation::NilScore => write!(f, "nil checkpoint must have the neutral score"),
            Violation::GuardPartition {
                checkpoint, sum, ..
            } => write!(
                f,
                "guards leaving checkpoint {checkpoint} sum to {sum} (want exactly 1) on a sampled store"
            ),
            Violation::GuardNotIndicator {
                checkpoint,
                transition,
                value,
                ..
            } => write!(
                f,
                "guard of transition {transition} (from checkpoint {checkpoint}) evaluated to {value}, not 0/1"
            ),
            Violation::ScoreRange {
                checkpoint, value, ..
            } => write!(
                f,
                "score at checkpoint {checkpoint} evaluated to {value}, outside [0, 1]"
            ),
        }
    }
}

/// Outcome of [`validate_ppg`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Stores actually drawn for the statistical checks.
    pub samples_checked: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "ok ({} sampled stores)", self.samples_checked)
        } else {
            writeln!(f, "{} violation(s):", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  - {v}")?;
            }
            Ok(())
        }
    }
}

fn sample_store<R: Rng>(m: usize, rng: &mut R) -> Vec<f64> {
    (0..m)
        .map(|_| {
            let bucket: f64 = rng.gen();
            if bucket < 0.20 {
                0.0
            } else if bucket < 0.50 {
                rng.gen_range(-3i32..=3) as f64
            } else if bucket < 0.70 {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                10.0 * z
            } else if bucket < 0.90 {
                rng.gen_range(-1e6..1e6)
            } else if bucket < 0.95 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect()
}

/// Do the guards leaving this checkpoint form a syntactic partition — a
/// single constant `true`, or a complementary pair `{p, !p}`?
fn syntactic_partition(guards: &[&Expr]) -> bool {
    match guards {
        [Expr::Lit(x)] => *x == 1.0,
        [a, b] => {
            let complement = |p: &Expr, q: &Expr| match q {
                Expr::Not(inner) => inner.as_ref() == p,
                _ => false,
            };
            (complement(a, b) || complement(b, a)) && is_predicate(a) && is_predicate(b)
        }
        _ => false,
    }
}

/// Validate a graph. `samples` random stores are drawn (deterministically
/// from `rng_seed`) for the checks that cannot be discharged syntactically.
pub fn validate_ppg(g: &Ppg, samples: usize, rng_seed: u64) -> ValidationReport {
    let mut violations = Vec::new();
    let nil = g.nil();

    // --- nil shape -------------------------------------------------------
    let nil_out = g.transitions_from(nil);
    if nil_out.len() != 1 {
        violations.push(Violation::NilShape {
            detail: format!("{} outgoing transitions (want exactly 1)", nil_out.len()),
        });
    } else {
        let t = &g.transitions()[nil_out[0]];
        if t.target != nil {
            violations.push(Violation::NilShape {
                detail: format!("self-loop required, found target {}", t.target),
            });
        }
        if t.guard != Expr::Lit(1.0) {
            violations.push(Violation::NilShape {
                detail: format!("guard must be the constant true, found {}", t.guard),
            });
        }
        if !t.kernel.is_identity() {
            violations.push(Violation::NilShape {
                detail: format!("kernel must be the identity, found {}", t.kernel),
            });
        }
    }
    if !g.score(nil).is_one() {
        violations.push(Violation::NilScore);
    }

    // --- partition checks: syntactic where possible ----------------------
    let mut needs_sampling: Vec<CheckpointId> = Vec::new();
    for s in 0..g.checkpoint_count() as CheckpointId {
        let guards: Vec<&Expr> = g
            .transitions_from(s)
            .iter()
            .map(|&i| &g.transitions()[i].guard)
            .collect();
        if guards.is_empty() {
            // A checkpoint with no way out fails partition on every store.
            violations.push(Violation::GuardPartition {
                checkpoint: s,
                store: vec![0.0; g.var_count()],
                sum: 0.0,
            });
        } else if !syntactic_partition(&guards) {
            needs_sampling.push(s);
        }
    }

    let scored: Vec<CheckpointId> = (0..g.checkpoint_count() as CheckpointId)
        .filter(|&s| !g.score(s).is_one())
        .collect();

    // --- statistical checks ----------------------------------------------
    let mut rng = rand::rngs::StdRng::seed_from_u64(rng_seed);
    let mut samples_checked = 0;
    if !needs_sampling.is_empty() || !scored.is_empty() {
        for _ in 0..samples {
            let store = sample_store(g.var_count(), &mut rng);
            samples_checked += 1;

            for &s in &needs_sampling {
                let mut sum = 0.0;
                for &i in g.transitions_from(s) {
                    let value = eval_expr(&g.transitions()[i].guard, &store);
                    if value != 0.0 && value != 1.0 {
                        violations.push(Violation::GuardNotIndicator {
                            checkpoint: s,
                            transition: i,
                            store: store.clone(),
                            value,
                        });
                    }
                    sum += value;
                }
                if sum != 1.0 {
                    violations.push(Violation::GuardPartition {
                        checkpoint: s,
                        store: store.clone(),
                        sum,
                    });
                }
                if violations.len() > 32 {
                    // Enough evidence; stop accumulating.
                    return ValidationReport {
                        violations,
                        samples_checked,
                    };
                }
            }

            for &s in &scored {
                let raw = eval_score_raw(g.score(s), &store);
                if !(0.0..=1.0).contains(&raw) {
                    violations.push(Violation::ScoreRange {
                        checkpoint: s,
                        store: store.clone(),
                        value: raw,
                    });
                    if violations.len() > 32 {
                        return ValidationReport {
                            violations,
                            samples_checked,
                        };
                    }
                }
            }
        }
    }

    ValidationReport {
        violations,
        samples_checked,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelAction;
    use crate::ppg::Transition;
    use crate::score::ScoreSpec;

    fn graph(transitions: Vec<Transition>, scores: Vec<(CheckpointId, ScoreSpec)>) -> Ppg {
        Ppg::new(
            vec!["x".into()],
            vec!["start".into(), "mid".into(), "nil".into()],
            transitions,
            2,
            scores,
        )
        .unwrap()
    }

    fn nil_loop() -> Transition {
        Transition {
            source: 2,
            guard: Expr::truth(),
            kernel: KernelAction::identity(),
            target: 2,
        }
    }

    #[test]
    fn complementary_pair_passes_without_sampling() {
        let p = Expr::var(0).gt(Expr::lit(0.0));
        let g = graph(
            vec![
                Transition {
                    source: 0,
                    guard: Expr::truth(),
                    kernel: KernelAction::identity(),
                    target: 1,
                },
                Transition {
                    source: 1,
                    guard: p.clone(),
                    kernel: KernelAction::identity(),
                    target: 1,
                },
                Transition {
                    source: 1,
                    guard: p.not(),
                    kernel: KernelAction::identity(),
                    target: 2,
                },
                nil_loop(),
            ],
            vec![],
        );
        let report = validate_ppg(&g, 100, 1);
        assert!(report.is_valid(), "{report}");
        assert_eq!(report.samples_checked, 0, "no statistical checks needed");
    }

    #[test]
    fn overlapping_guards_get_caught() {
        // x > 0 and x >= 0 overlap at positive x and leave a gap nowhere,
        // summing to 2 there.
        let g = graph(
            vec![
                Transition {
                    source: 0,
                    guard: Expr::truth(),
                    kernel: KernelAction::identity(),
                    target: 1,
                },
                Transition {
                    source: 1,
                    guard: Expr::var(0).gt(Expr::lit(0.0)),
                    kernel: KernelAction::identity(),
                    target: 1,
                },
                Transition {
                    source: 1,
                    guard: Expr::var(0).ge(Expr::lit(0.0)),
                    kernel: KernelAction::identity(),
                    target: 2,
                },
                nil_loop(),
            ],
            vec![],
        );
        let report = validate_ppg(&g, 200, 3);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::GuardPartition { checkpoint: 1, .. })));
    }

    #[test]
    fn nil_shape_violations() {
        // nil's "self-loop" points elsewhere and carries a score.
        let g = graph(
            vec![
                Transition {
                    source: 0,
                    guard: Expr::truth(),
                    kernel: KernelAction::identity(),
                    target: 2,
                },
                Transition {
                    source: 1,
                    guard: Expr::truth(),
                    kernel: KernelAction::identity(),
                    target: 2,
                },
                Transition {
                    source: 2,
                    guard: Expr::truth(),
                    kernel: KernelAction::identity(),
                    target: 0,
                },
            ],
            vec![(2, ScoreSpec::Pred(Expr::var(0).gt(Expr::lit(0.0))))],
        );
        let report = validate_ppg(&g, 10, 1);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NilShape { .. })));
        assert!(report.violations.contains(&Violation::NilScore));
    }

    #[test]
    fn score_range_checked_on_samples() {
        // A raw expression score that can exceed 1.
        let g = graph(
            vec![
                Transition {
                    source: 0,
                    guard: Expr::truth(),
                    kernel: KernelAction::identity(),
                    target: 1,
                },
                Transition {
                    source: 1,
                    guard: Expr::truth(),
                    kernel: KernelAction::identity(),
                    target: 2,
                },
                nil_loop(),
            ],
            vec![(1, ScoreSpec::Clamped(Expr::var(0).abs()))],
        );
        let report = validate_ppg(&g, 500, 11);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::ScoreRange { checkpoint: 1, .. })));
    }
}
