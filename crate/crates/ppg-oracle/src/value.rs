//! Exact extended-rational values and expression evaluation.
//!
//! Every finite f64 is a dyadic rational, so lifting a graph's literals
//! into `BigRational` is exact — the oracle evaluates the *same* numbers
//! the floating engine starts from, without rounding anywhere downstream.
//! The arithmetic mirrors the engine's extended-real conventions case by
//! case (0·∞ = 0, x/0 = sign(x)·∞, 0/0 = 0, ∞−∞ = 0, √negative = 0); the
//! one operation rationals cannot follow is an irrational square root,
//! which reports the model as not enumerable.

use crate::OracleError;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use ppg_core::{CmpOp, Expr};
use std::fmt;

/// An extended rational: the exact counterpart of the engine's non-NaN f64
/// values. Variant order gives the derived `Ord` the extended-real order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QVal {
    NegInf,
    Q(BigRational),
    PosInf,
}

impl QVal {
    pub fn zero() -> QVal {
        QVal::Q(BigRational::zero())
    }

    pub fn one() -> QVal {
        QVal::Q(BigRational::one())
    }

    pub fn from_int(n: i64) -> QVal {
        QVal::Q(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact conversion; NaN maps to 0 like the engine's sanitizer.
    pub fn from_f64(x: f64) -> QVal {
        if x.is_nan() {
            QVal::zero()
        } else if x == f64::INFINITY {
            QVal::PosInf
        } else if x == f64::NEG_INFINITY {
            QVal::NegInf
        } else {
            QVal::Q(BigRational::from_float(x).expect("finite f64 is rational"))
        }
    }

    /// Nearest f64 (for reporting; the exact value stays authoritative).
    pub fn to_f64(&self) -> f64 {
        match self {
            QVal::NegInf => f64::NEG_INFINITY,
            QVal::PosInf => f64::INFINITY,
            QVal::Q(q) => q.to_f64().unwrap_or(0.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, QVal::Q(q) if q.is_zero())
    }

    fn is_positive(&self) -> bool {
        match self {
            QVal::PosInf => true,
            QVal::NegInf => false,
            QVal::Q(q) => q.is_positive(),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            QVal::Q(q) => Some(q),
            _ => None,
        }
    }
}

impl fmt::Display for QVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QVal::NegInf => write!(f, "-inf"),
            QVal::PosInf => write!(f, "inf"),
            QVal::Q(q) => write!(f, "{q}"),
        }
    }
}

pub fn qadd(a: &QVal, b: &QVal) -> QVal {
    match (a, b) {
        (QVal::Q(x), QVal::Q(y)) => QVal::Q(x + y),
        // Opposite infinities cancel to the declared default.
        (QVal::PosInf, QVal::NegInf) | (QVal::NegInf, QVal::PosInf) => QVal::zero(),
        (QVal::PosInf, _) | (_, QVal::PosInf) => QVal::PosInf,
        (QVal::NegInf, _) | (_, QVal::NegInf) => QVal::NegInf,
    }
}

fn qneg(a: &QVal) -> QVal {
    match a {
        QVal::PosInf => QVal::NegInf,
        QVal::NegInf => QVal::PosInf,
        QVal::Q(q) => QVal::Q(-q),
    }
}

pub fn qsub(a: &QVal, b: &QVal) -> QVal {
    qadd(a, &qneg(b))
}

pub fn qmul(a: &QVal, b: &QVal) -> QVal {
    if a.is_zero() || b.is_zero() {
        return QVal::zero();
    }
    match (a, b) {
        (QVal::Q(x), QVal::Q(y)) => QVal::Q(x * y),
        _ => {
            if a.is_positive() == b.is_positive() {
                QVal::PosInf
            } else {
                QVal::NegInf
            }
        }
    }
}

pub fn qdiv(a: &QVal, b: &QVal) -> QVal {
    if b.is_zero() {
        // Division by zero takes the sign of the dividend.
        return if a.is_zero() {
            QVal::zero()
        } else if a.is_positive() {
            QVal::PosInf
        } else {
            QVal::NegInf
        };
    }
    match (a, b) {
        (QVal::Q(x), QVal::Q(y)) => QVal::Q(x / y),
        // finite / ∞ = 0; ∞ / ∞ = 0 (the NaN default).
        (QVal::Q(_), _) | (QVal::PosInf, QVal::PosInf) | (QVal::PosInf, QVal::NegInf)
        | (QVal::NegInf, QVal::PosInf) | (QVal::NegInf, QVal::NegInf) => QVal::zero(),
        _ => {
            if a.is_positive() == b.is_positive() {
                QVal::PosInf
            } else {
                QVal::NegInf
            }
        }
    }
}

fn qabs(a: &QVal) -> QVal {
    match a {
        QVal::NegInf | QVal::PosInf => QVal::PosInf,
        QVal::Q(q) => QVal::Q(q.abs()),
    }
}

/// Exact square root of a nonnegative rational, if one exists.
fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    let exact_root = |n: &BigInt| -> Option<BigInt> {
        let r = n.sqrt();
        if &(&r * &r) == n {
            Some(r)
        } else {
            None
        }
    };
    Some(BigRational::new(
        exact_root(q.numer())?,
        exact_root(q.denom())?,
    ))
}

pub fn qsqrt(a: &QVal) -> Result<QVal, OracleError> {
    match a {
        QVal::NegInf => Ok(QVal::zero()),
        QVal::PosInf => Ok(QVal::PosInf),
        QVal::Q(q) => {
            if q.is_negative() {
                Ok(QVal::zero())
            } else {
                rational_sqrt(q).map(QVal::Q).ok_or_else(|| {
                    OracleError::NotEnumerable(format!("irrational square root of {q}"))
                })
            }
        }
    }
}

fn truthy(a: &QVal) -> bool {
    !a.is_zero()
}

fn indicator(b: bool) -> QVal {
    if b {
        QVal::one()
    } else {
        QVal::zero()
    }
}

/// Exact evaluation: same conventions as the engine's f64 evaluator, with
/// errors only where exact arithmetic is genuinely impossible.
pub fn eval_q(e: &Expr, v: &[QVal]) -> Result<QVal, OracleError> {
    Ok(match e {
        Expr::Var(i) => v[*i].clone(),
        Expr::Lit(x) => QVal::from_f64(*x),
        Expr::Add(a, b) => qadd(&eval_q(a, v)?, &eval_q(b, v)?),
        Expr::Sub(a, b) => qsub(&eval_q(a, v)?, &eval_q(b, v)?),
        Expr::Mul(a, b) => qmul(&eval_q(a, v)?, &eval_q(b, v)?),
        Expr::Div(a, b) => qdiv(&eval_q(a, v)?, &eval_q(b, v)?),
        Expr::Abs(a) => qabs(&eval_q(a, v)?),
        Expr::Sqrt(a) => qsqrt(&eval_q(a, v)?)?,
        Expr::Min(a, b) => eval_q(a, v)?.min(eval_q(b, v)?),
        Expr::Max(a, b) => eval_q(a, v)?.max(eval_q(b, v)?),
        Expr::Cmp(op, a, b) => {
            let x = eval_q(a, v)?;
            let y = eval_q(b, v)?;
            indicator(match op {
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Eq => x == y,
                CmpOp::Ge => x >= y,
                CmpOp::Gt => x > y,
            })
        }
        Expr::And(a, b) => indicator(truthy(&eval_q(a, v)?) && truthy(&eval_q(b, v)?)),
        Expr::Or(a, b) => indicator(truthy(&eval_q(a, v)?) || truthy(&eval_q(b, v)?)),
        Expr::Not(a) => indicator(!truthy(&eval_q(a, v)?)),
    })
}
