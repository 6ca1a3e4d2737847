//! Primitive distributions: sampling and density w.r.t. each family's base
//! measure (counting measure for the discrete families, Lebesgue for the
//! continuous ones).
//!
//! Parameters are expressions, evaluated against the *current* store at
//! sample/density time, so e.g. `Normal(x, 2)` is the usual random-walk
//! kernel. Parameter combinations outside a family's domain (negative or
//! infinite standard deviations, `p` outside [0,1], an empty choice list,
//! `lo >= hi`, …) do not abort a run: the distribution degrades to the
//! declared default `Dirac(0)` — a point mass at 0 for sampling *and* for
//! density evaluation. Runs stay total; validation is where modeling
//! mistakes are surfaced.

use crate::expr::{eval_expr, Expr};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};
use std::fmt;

/// A distribution with expression-valued parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum DistributionSpec {
    /// Point mass on {0, 1} with success probability `p`.
    Bernoulli { p: Expr },
    /// Continuous uniform on `[lo, hi)`.
    Uniform { lo: Expr, hi: Expr },
    /// Gaussian with standard deviation `sd` (not variance).
    Normal { mean: Expr, sd: Expr },
    /// Gaussian conditioned on `[lo, hi]`.
    TruncNormal {
        lo: Expr,
        hi: Expr,
        mean: Expr,
        sd: Expr,
    },
    /// Uniform choice among the evaluated items (duplicates allowed and
    /// counted by the density).
    DiscreteUniform { items: Vec<Expr> },
    /// Point mass at the evaluated value.
    Dirac { value: Expr },
}

impl DistributionSpec {
    pub fn max_var(&self) -> Option<usize> {
        let fold = |exprs: &[&Expr]| {
            exprs
                .iter()
                .filter_map(|e| e.max_var())
                .max()
        };
        match self {
            DistributionSpec::Bernoulli { p } => p.max_var(),
            DistributionSpec::Uniform { lo, hi } => fold(&[lo, hi]),
            DistributionSpec::Normal { mean, sd } => fold(&[mean, sd]),
            DistributionSpec::TruncNormal { lo, hi, mean, sd } => fold(&[lo, hi, mean, sd]),
            DistributionSpec::DiscreteUniform { items } => {
                items.iter().filter_map(|e| e.max_var()).max()
            }
            DistributionSpec::Dirac { value } => value.max_var(),
        }
    }

    /// Can exact enumeration handle this family? (Finite support only.)
    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            DistributionSpec::Bernoulli { .. }
                | DistributionSpec::DiscreteUniform { .. }
                | DistributionSpec::Dirac { .. }
        )
    }
}

fn sqrt_2pi() -> f64 {
    (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal pdf evaluated the same way everywhere (the `density_ratio`
/// score relies on the modal value being bit-reproducible).
#[inline]
fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * sqrt_2pi())
}

enum Checked {
    Bernoulli { p: f64 },
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
    TruncNormal { lo: f64, hi: f64, mean: f64, sd: f64, mass: f64 },
    Choice { values: Vec<f64> },
    Dirac { value: f64 },
}

/// Evaluate parameters and check the family's domain; out-of-domain
/// combinations collapse to `Dirac(0)`.
fn check(d: &DistributionSpec, v: &[f64]) -> Checked {
    let fallback = Checked::Dirac { value: 0.0 };
    match d {
        DistributionSpec::Bernoulli { p } => {
            let p = eval_expr(p, v);
            if p.is_finite() && (0.0..=1.0).contains(&p) {
                Checked::Bernoulli { p }
            } else {
                fallback
            }
        }
        DistributionSpec::Uniform { lo, hi } => {
            let lo = eval_expr(lo, v);
            let hi = eval_expr(hi, v);
            if lo.is_finite() && hi.is_finite() && lo < hi {
                Checked::Uniform { lo, hi }
            } else {
                fallback
            }
        }
        DistributionSpec::Normal { mean, sd } => {
            let mean = eval_expr(mean, v);
            let sd = eval_expr(sd, v);
            if mean.is_finite() && sd.is_finite() && sd > 0.0 {
                Checked::Normal { mean, sd }
            } else {
                fallback
            }
        }
        DistributionSpec::TruncNormal { lo, hi, mean, sd } => {
            let lo = eval_expr(lo, v);
            let hi = eval_expr(hi, v);
            let mean = eval_expr(mean, v);
            let sd = eval_expr(sd, v);
            if lo.is_finite()
                && hi.is_finite()
                && mean.is_finite()
                && sd.is_finite()
                && sd > 0.0
                && lo < hi
            {
                let std = StdNormal::new(0.0, 1.0).expect("unit normal");
                let mass = std.cdf((hi - mean) / sd) - std.cdf((lo - mean) / sd);
                // In the far tails the truncation window can round to zero
                // mass; that is out of domain like everything else here.
                if mass > 0.0 && mass.is_finite() {
                    Checked::TruncNormal { lo, hi, mean, sd, mass }
                } else {
                    fallback
                }
            } else {
                fallback
            }
        }
        DistributionSpec::DiscreteUniform { items } => {
            if items.is_empty() {
                fallback
            } else {
                Checked::Choice {
                    values: items.iter().map(|e| eval_expr(e, v)).collect(),
                }
            }
        }
        DistributionSpec::Dirac { value } => Checked::Dirac {
            value: eval_expr(value, v),
        },
    }
}

/// Draw one value. Consumes randomness only from `rng`, so identical
/// generator states yield identical draws.
pub fn sample_dist<R: Rng + ?Sized>(d: &DistributionSpec, v: &[f64], rng: &mut R) -> f64 {
    match check(d, v) {
        Checked::Bernoulli { p } => {
            let u: f64 = rng.gen();
            (u < p) as u8 as f64
        }
        Checked::Uniform { lo, hi } => rng.gen_range(lo..hi),
        Checked::Normal { mean, sd } => {
            let z: f64 = rng.sample(StandardNormal);
            mean + sd * z
        }
        Checked::TruncNormal { lo, hi, mean, sd, mass } => {
            // Inverse-cdf sampling: one uniform per draw, no rejection loop.
            let std = StdNormal::new(0.0, 1.0).expect("unit normal");
            let lo_p = std.cdf((lo - mean) / sd);
            let u: f64 = rng.gen();
            let x = mean + sd * std.inverse_cdf(lo_p + u * mass);
            x.clamp(lo, hi)
        }
        Checked::Choice { values } => values[rng.gen_range(0..values.len())],
        Checked::Dirac { value } => value,
    }
}

/// Density of `x` w.r.t. the family's base measure: probability mass for
/// Bernoulli/DiscreteUniform/Dirac, Lebesgue density for Uniform/Normal/
/// TruncNormal. Total and NaN-free.
pub fn density(d: &DistributionSpec, v: &[f64], x: f64) -> f64 {
    if x.is_nan() {
        return 0.0;
    }
    match check(d, v) {
        Checked::Bernoulli { p } => {
            if x == 1.0 {
                p
            } else if x == 0.0 {
                1.0 - p
            } else {
                0.0
            }
        }
        Checked::Uniform { lo, hi } => {
            if (lo..=hi).contains(&x) {
                1.0 / (hi - lo)
            } else {
                0.0
            }
        }
        Checked::Normal { mean, sd } => normal_pdf(x, mean, sd),
        Checked::TruncNormal { lo, hi, mean, sd, mass } => {
            if (lo..=hi).contains(&x) {
                normal_pdf(x, mean, sd) / mass
            } else {
                0.0
            }
        }
        Checked::Choice { values } => {
            let hits = values.iter().filter(|&&y| y == x).count();
            hits as f64 / values.len() as f64
        }
        Checked::Dirac { value } => (x == value) as u8 as f64,
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionSpec::Bernoulli { p } => write!(f, "B({p})"),
            DistributionSpec::Uniform { lo, hi } => write!(f, "U({lo}, {hi})"),
            DistributionSpec::Normal { mean, sd } => write!(f, "N({mean}, {sd})"),
            DistributionSpec::TruncNormal { lo, hi, mean, sd } => {
                write!(f, "N_T({lo}, {hi}, {mean}, {sd})")
            }
            DistributionSpec::DiscreteUniform { items } => {
                write!(f, "DU(")?;
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
            DistributionSpec::Dirac { value } => write!(f, "Dirac({value})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng() -> impl Rng {
        rand::rngs::StdRng::seed_from_u64(7)
    }

    #[test]
    fn bernoulli_mass() {
        let d = DistributionSpec::Bernoulli { p: Expr::lit(0.25) };
        assert_eq!(density(&d, &[], 1.0), 0.25);
        assert_eq!(density(&d, &[], 0.0), 0.75);
        assert_eq!(density(&d, &[], 0.5), 0.0);
    }

    #[test]
    fn discrete_uniform_counts_duplicates() {
        let d = DistributionSpec::DiscreteUniform {
            items: vec![Expr::lit(2.0), Expr::lit(2.0), Expr::lit(5.0)],
        };
        assert!((density(&d, &[], 2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((density(&d, &[], 5.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters_degrade_to_point_mass_at_zero() {
        let mut r = rng();
        // sd = -1 is out of domain.
        let d = DistributionSpec::Normal {
            mean: Expr::lit(3.0),
            sd: Expr::lit(-1.0),
        };
        for _ in 0..10 {
            assert_eq!(sample_dist(&d, &[], &mut r), 0.0);
        }
        assert_eq!(density(&d, &[], 0.0), 1.0);
        assert_eq!(density(&d, &[], 3.0), 0.0);

        // infinite mean likewise.
        let d = DistributionSpec::Normal {
            mean: Expr::lit(f64::INFINITY),
            sd: Expr::lit(1.0),
        };
        assert_eq!(sample_dist(&d, &[], &mut r), 0.0);
    }

    #[test]
    fn truncated_normal_stays_in_window_and_normalizes() {
        let d = DistributionSpec::TruncNormal {
            lo: Expr::lit(0.0),
            hi: Expr::lit(1.0),
            mean: Expr::lit(0.0),
            sd: Expr::lit(25.0),
        };
        let mut r = rng();
        for _ in 0..200 {
            let x = sample_dist(&d, &[], &mut r);
            assert!((0.0..=1.0).contains(&x), "draw {x} escaped the window");
        }
        // Nearly-flat over [0,1]: density must integrate to ~1.
        let steps = 10_000;
        let dx = 1.0 / steps as f64;
        let total: f64 = (0..steps)
            .map(|i| density(&d, &[], (i as f64 + 0.5) * dx) * dx)
            .sum();
        assert!((total - 1.0).abs() < 1e-6, "integral {total}");
        assert_eq!(density(&d, &[], 1.5), 0.0);
    }

    #[test]
    fn normal_density_modal_value_matches_inline_formula() {
        // The density-ratio score divides by a modeler-supplied normalizer
        // that is typically written as 1/(sd*sqrt(2*pi)); the two must agree
        // bit-for-bit so the modal ratio is exactly 1.
        let d = DistributionSpec::Normal {
            mean: Expr::lit(0.0),
            sd: Expr::lit(0.01),
        };
        let expected = 1.0 / (0.01 * (2.0 * std::f64::consts::PI).sqrt());
        assert_eq!(density(&d, &[], 0.0), expected);
    }

    #[test]
    fn parameters_read_the_current_store() {
        let d = DistributionSpec::Dirac {
            value: Expr::var(1).add(Expr::lit(1.0)),
        };
        let mut r = rng();
        assert_eq!(sample_dist(&d, &[0.0, 41.0], &mut r), 42.0);
    }
}
