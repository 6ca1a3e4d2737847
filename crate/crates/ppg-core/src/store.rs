//! Variable stores and total extended-real arithmetic.
//!
//! A store is a fixed-width vector of extended reals (f64 plus ±∞, never
//! NaN). All arithmetic used by expression evaluation is *total*: the
//! indeterminate forms that IEEE 754 maps to NaN are given declared default
//! values so that evaluation can never poison a store.
//!
//! Declared defaults:
//!   * `0 * ±∞ = 0` (before the sign rules of IEEE multiplication apply)
//!   * `x / 0 = sign(x) * ∞` for `x != 0` — the sign comes from the
//!     dividend, regardless of the zero's sign bit
//!   * `0 / 0 = 0`
//!   * `∞ - ∞ = 0` (and any other residual NaN collapses to 0)
//!   * `sqrt(x) = 0` for `x < 0`

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StoreError {
    #[error("store entry {index} is NaN; stores hold extended reals only")]
    NaN { index: usize },
}

/// Replace NaN by the declared default 0. Identity on everything else.
#[inline]
pub fn sanitize(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x
    }
}

/// Total addition: `∞ + (-∞) = 0` instead of NaN.
#[inline]
pub fn xadd(a: f64, b: f64) -> f64 {
    sanitize(a + b)
}

/// Total subtraction: `∞ - ∞ = 0` instead of NaN.
#[inline]
pub fn xsub(a: f64, b: f64) -> f64 {
    sanitize(a - b)
}

/// Total multiplication with the measure-theoretic convention `0 * ±∞ = 0`.
#[inline]
pub fn xmul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        sanitize(a * b)
    }
}

/// Total division: `x/0 = sign(x)*∞` (sign of the dividend), `0/0 = 0`,
/// `±∞ / ±∞ = 0` (via the NaN default).
#[inline]
pub fn xdiv(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else if a > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        sanitize(a / b)
    }
}

/// Total square root: negative arguments map to the declared default 0.
#[inline]
pub fn xsqrt(a: f64) -> f64 {
    if a < 0.0 {
        0.0
    } else {
        a.sqrt()
    }
}

/// A fixed-width vector of extended reals. The width is the graph's
/// variable count; entry `i` is the value of variable `i`.
///
/// Stores are immutable from the outside: transitions produce *new* stores.
/// The no-NaN invariant is enforced at construction and preserved by
/// [`crate::kernel_step`] (every written value passes through [`sanitize`]).
#[derive(Clone, Debug, PartialEq)]
pub struct Store(Vec<f64>);

impl Store {
    /// Wrap a value vector, rejecting NaN entries.
    pub fn new(values: Vec<f64>) -> Result<Self, StoreError> {
        if let Some(index) = values.iter().position(|x| x.is_nan()) {
            return Err(StoreError::NaN { index });
        }
        Ok(Store(values))
    }

    /// The all-zero store of width `m` — the initial state of every run.
    pub fn zeros(m: usize) -> Self {
        Store(vec![0.0; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for Store {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for Store {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
