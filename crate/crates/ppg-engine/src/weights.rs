//! Weight vectors: normalization and effective sample size.
//!
//! Weights come from scores, so a well-formed weight vector is finite and
//! nonnegative; anything else is a hard error. The all-zero vector is a
//! *degenerate* ensemble — every trajectory was killed by conditioning.
//! Normalization maps it to the uniform vector (the run continues, the
//! event is surfaced through diagnostics); the effective sample size is
//! undefined there and errors instead.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WeightError {
    #[error("weight vector is empty")]
    Empty,
    #[error("weight {value} at index {index} is not a finite nonnegative real")]
    Invalid { index: usize, value: f64 },
    #[error("degenerate ensemble")]
    Degenerate,
}

fn check(w: &[f64]) -> Result<f64, WeightError> {
    if w.is_empty() {
        return Err(WeightError::Empty);
    }
    let mut sum = 0.0;
    for (index, &value) in w.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(WeightError::Invalid { index, value });
        }
        sum += value;
    }
    Ok(sum)
}

/// A normalized weight vector plus the degeneracy flag.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    /// Sums to 1.
    pub weights: Vec<f64>,
    /// True when the input was all-zero and the uniform fallback was used.
    pub degenerate: bool,
}

/// Normalize to sum 1. All-zero input falls back to the uniform vector and
/// sets the `degenerate` flag; negative, NaN or infinite entries are hard
/// errors.
pub fn normalize_weights(w: &[f64]) -> Result<Normalized, WeightError> {
    let sum = check(w)?;
    if sum == 0.0 {
        let n = w.len() as f64;
        return Ok(Normalized {
            weights: vec![1.0 / n; w.len()],
            degenerate: true,
        });
    }
    Ok(Normalized {
        weights: w.iter().map(|x| x / sum).collect(),
        degenerate: false,
    })
}

/// Effective sample size `(Σw)² / Σw²`. Always in [1, N] for valid nonzero
/// weight vectors and invariant under rescaling; the all-zero vector is an
/// error ("degenerate ensemble").
pub fn ess(w: &[f64]) -> Result<f64, WeightError> {
    let sum = check(w)?;
    if sum == 0.0 {
        return Err(WeightError::Degenerate);
    }
    let sum_sq: f64 = w.iter().map(|x| x * x).sum();
    Ok(sum * sum / sum_sq)
}
