//! Transition kernels: ordered lists of assignment/sampling steps.
//!
//! A kernel is executed top to bottom against a working copy of the store,
//! so later steps see the values written by earlier ones — `r1 ~ DU(x1, x2);
//! r2 ~ N(r1, |x2|)` chains the first draw into the second's mean. The empty
//! list is the identity kernel.

use crate::dist::{sample_dist, DistributionSpec};
use crate::expr::{eval_expr, Expr};
use crate::store::{sanitize, Store};
use rand::Rng;
use std::fmt;

/// One kernel step.
#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    /// Deterministic write: `target := value`.
    Assign { target: usize, value: Expr },
    /// Random write: `target ~ dist`. `Sample` from a `Dirac` is exactly
    /// `Assign` of the point.
    Sample {
        target: usize,
        dist: DistributionSpec,
    },
}

impl Step {
    pub fn target(&self) -> usize {
        match self {
            Step::Assign { target, .. } | Step::Sample { target, .. } => *target,
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        let read = match self {
            Step::Assign { value, .. } => value.max_var(),
            Step::Sample { dist, .. } => dist.max_var(),
        };
        Some(read.map_or(self.target(), |r| r.max(self.target())))
    }
}

/// An ordered sequence of steps, applied atomically per transition.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct KernelAction {
    pub steps: Vec<Step>,
}

impl KernelAction {
    pub fn identity() -> Self {
        KernelAction { steps: Vec::new() }
    }

    pub fn new(steps: Vec<Step>) -> Self {
        KernelAction { steps }
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn max_var(&self) -> Option<usize> {
        self.steps.iter().filter_map(|s| s.max_var()).max()
    }
}

/// Run a kernel against a row in place. Every written value is swept for
/// NaN, preserving the store invariant.
pub fn kernel_step_in_place<R: Rng + ?Sized>(k: &KernelAction, row: &mut [f64], rng: &mut R) {
    for step in &k.steps {
        let value = match step {
            Step::Assign { value, .. } => eval_expr(value, row),
            Step::Sample { dist, .. } => sample_dist(dist, row, rng),
        };
        row[step.target()] = sanitize(value);
    }
}

/// Run a kernel against a store, producing the successor store. The input
/// store is untouched; the only side effect is advancing `rng`. Identical
/// generator states produce bit-identical successors.
pub fn kernel_step<R: Rng + ?Sized>(k: &KernelAction, v: &Store, rng: &mut R) -> Store {
    let mut next = v.clone();
    kernel_step_in_place(k, next.values_mut(), rng);
    next
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Assign { target, value } => write!(f, "v{target} := {value}"),
            Step::Sample { target, dist } => write!(f, "v{target} ~ {dist}"),
        }
    }
}

impl fmt::Display for KernelAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "id");
        }
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn steps_chain_top_to_bottom() {
        // x := 2; y := x + 1 reads the freshly written x.
        let k = KernelAction::new(vec![
            Step::Assign {
                target: 0,
                value: Expr::lit(2.0),
            },
            Step::Assign {
                target: 1,
                value: Expr::var(0).add(Expr::lit(1.0)),
            },
        ]);
        let v = Store::zeros(2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = kernel_step(&k, &v, &mut rng);
        assert_eq!(out.as_slice(), &[2.0, 3.0]);
        assert_eq!(v.as_slice(), &[0.0, 0.0], "input store is untouched");
    }

    #[test]
    fn bit_reproducible_under_equal_generator_state() {
        let k = KernelAction::new(vec![
            Step::Sample {
                target: 0,
                dist: DistributionSpec::Normal {
                    mean: Expr::lit(0.0),
                    sd: Expr::lit(1.0),
                },
            },
            Step::Sample {
                target: 1,
                dist: DistributionSpec::Uniform {
                    lo: Expr::lit(0.0),
                    hi: Expr::var(0).abs().add(Expr::lit(1.0)),
                },
            },
        ]);
        let v = Store::zeros(2);
        let a = kernel_step(&k, &v, &mut ChaCha8Rng::seed_from_u64(99));
        let b = kernel_step(&k, &v, &mut ChaCha8Rng::seed_from_u64(99));
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn sampling_a_point_mass_is_assignment() {
        let e = Expr::var(0).mul(Expr::lit(3.0));
        let as_sample = KernelAction::new(vec![Step::Sample {
            target: 1,
            dist: DistributionSpec::Dirac { value: e.clone() },
        }]);
        let as_assign = KernelAction::new(vec![Step::Assign { target: 1, value: e }]);
        let v = Store::new(vec![4.0, 0.0]).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(
            kernel_step(&as_sample, &v, &mut r1).as_slice(),
            kernel_step(&as_assign, &v, &mut r2).as_slice()
        );
    }

    #[test]
    fn chained_mixture_mean() {
        // r1 ~ DU(x1, x2); r2 ~ N(r1, |x2|) over (x1, x2) = (0, 1):
        // E[r2] = E[r1] = 0.5. Checked to ±0.02 over 1e5 draws.
        let k = KernelAction::new(vec![
            Step::Sample {
                target: 2,
                dist: DistributionSpec::DiscreteUniform {
                    items: vec![Expr::var(0), Expr::var(1)],
                },
            },
            Step::Sample {
                target: 3,
                dist: DistributionSpec::Normal {
                    mean: Expr::var(2),
                    sd: Expr::var(1).abs(),
                },
            },
        ]);
        let v = Store::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12345);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += kernel_step(&k, &v, &mut rng)[3];
        }
        let mean = sum / n as f64;
        assert!(
            (mean - 0.5).abs() < 0.02,
            "mixture mean {mean}, expected 0.5 +/- 0.02"
        );
    }
}
