//! The expression language shared by guards, kernels, scores and target
//! functions.
//!
//! Expressions are evaluated over a store of extended reals and always
//! produce an extended real (total evaluation, see [`crate::store`] for the
//! declared defaults). There is no boolean type: comparisons and logical
//! connectives return 0.0 or 1.0, i.e. every predicate carries an implicit
//! indicator bracket. `and`/`or`/`not` treat any nonzero operand as true,
//! which only matters for defensively typed inputs — well-formed guards are
//! predicate-shaped and thus already 0/1-valued.

use crate::store::{sanitize, xadd, xdiv, xmul, xsqrt, xsub};
use std::fmt;

/// Comparison operators. There is no `!=`; front ends desugar it to
/// `not (a == b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "==",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

/// Expression AST. `Var` indices refer to store slots.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Var(usize),
    Lit(f64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Sqrt(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

impl Expr {
    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn lit(x: f64) -> Expr {
        Expr::Lit(x)
    }

    /// The constant guard `true`.
    pub fn truth() -> Expr {
        Expr::Lit(1.0)
    }

    pub fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }

    pub fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }

    pub fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }

    pub fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }

    pub fn abs(self) -> Expr {
        Expr::Abs(Box::new(self))
    }

    pub fn cmp(self, op: CmpOp, rhs: Expr) -> Expr {
        Expr::Cmp(op, Box::new(self), Box::new(rhs))
    }

    pub fn eq(self, rhs: Expr) -> Expr {
        self.cmp(CmpOp::Eq, rhs)
    }

    pub fn lt(self, rhs: Expr) -> Expr {
        self.cmp(CmpOp::Lt, rhs)
    }

    pub fn le(self, rhs: Expr) -> Expr {
        self.cmp(CmpOp::Le, rhs)
    }

    pub fn ge(self, rhs: Expr) -> Expr {
        self.cmp(CmpOp::Ge, rhs)
    }

    pub fn gt(self, rhs: Expr) -> Expr {
        self.cmp(CmpOp::Gt, rhs)
    }

    pub fn and(self, rhs: Expr) -> Expr {
        Expr::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Expr) -> Expr {
        Expr::Or(Box::new(self), Box::new(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Expr {
        Expr::Not(Box::new(self))
    }

    /// Largest variable index mentioned, if any. Used for width checks.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Lit(_) => None,
            Expr::Abs(a) | Expr::Sqrt(a) | Expr::Not(a) => a.max_var(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b)
            | Expr::Cmp(_, a, b)
            | Expr::And(a, b)
            | Expr::Or(a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, None) => x,
                (None, y) => y,
            },
        }
    }
}

/// Is this expression syntactically guaranteed to evaluate to 0 or 1?
///
/// Comparisons and logical connectives always are; literals 0 and 1 count as
/// the constant predicates. Guards and `pred` scores are required (by
/// validation) to be predicate-shaped.
pub fn is_predicate(e: &Expr) -> bool {
    match e {
        Expr::Cmp(..) | Expr::And(..) | Expr::Or(..) | Expr::Not(..) => true,
        Expr::Lit(x) => *x == 0.0 || *x == 1.0,
        _ => false,
    }
}

#[inline]
fn truthy(x: f64) -> bool {
    x != 0.0
}

/// Evaluate an expression over a store slice. Total: the result is always a
/// non-NaN extended real, for any store of sufficient width.
///
/// # Panics
///
/// Panics if the expression mentions a variable index `>= v.len()`; graph
/// construction rejects such expressions up front.
pub fn eval_expr(e: &Expr, v: &[f64]) -> f64 {
    match e {
        Expr::Var(i) => v[*i],
        Expr::Lit(x) => *x,
        Expr::Add(a, b) => xadd(eval_expr(a, v), eval_expr(b, v)),
        Expr::Sub(a, b) => xsub(eval_expr(a, v), eval_expr(b, v)),
        Expr::Mul(a, b) => xmul(eval_expr(a, v), eval_expr(b, v)),
        Expr::Div(a, b) => xdiv(eval_expr(a, v), eval_expr(b, v)),
        Expr::Abs(a) => eval_expr(a, v).abs(),
        Expr::Sqrt(a) => xsqrt(eval_expr(a, v)),
        // min/max of non-NaN floats; f64::min/max are total here.
        Expr::Min(a, b) => eval_expr(a, v).min(eval_expr(b, v)),
        Expr::Max(a, b) => eval_expr(a, v).max(eval_expr(b, v)),
        Expr::Cmp(op, a, b) => {
            let x = eval_expr(a, v);
            let y = eval_expr(b, v);
            let holds = match op {
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Eq => x == y,
                CmpOp::Ge => x >= y,
                CmpOp::Gt => x > y,
            };
            holds as u8 as f64
        }
        Expr::And(a, b) => (truthy(eval_expr(a, v)) && truthy(eval_expr(b, v))) as u8 as f64,
        Expr::Or(a, b) => (truthy(eval_expr(a, v)) || truthy(eval_expr(b, v))) as u8 as f64,
        Expr::Not(a) => !truthy(eval_expr(a, v)) as u8 as f64,
    }
}

/// Evaluate with an explicit NaN sweep at the top, used where the input is
/// not known to come from a sanitized store.
pub fn eval_expr_sanitized(e: &Expr, v: &[f64]) -> f64 {
    sanitize(eval_expr(e, v))
}

struct DisplayWith<'a> {
    expr: &'a Expr,
    names: Option<&'a [String]>,
}

impl fmt::Display for DisplayWith<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self.expr, self.names, f)
    }
}

fn fmt_expr(e: &Expr, names: Option<&[String]>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let sub = |e: &Expr| DisplayWith { expr: e, names }.to_string();
    match e {
        Expr::Var(i) => match names.and_then(|n| n.get(*i)) {
            Some(name) => write!(f, "{name}"),
            None => write!(f, "v{i}"),
        },
        Expr::Lit(x) => write!(f, "{x}"),
        Expr::Add(a, b) => write!(f, "({} + {})", sub(a), sub(b)),
        Expr::Sub(a, b) => write!(f, "({} - {})", sub(a), sub(b)),
        Expr::Mul(a, b) => write!(f, "({} * {})", sub(a), sub(b)),
        Expr::Div(a, b) => write!(f, "({} / {})", sub(a), sub(b)),
        Expr::Abs(a) => write!(f, "|{}|", sub(a)),
        Expr::Sqrt(a) => write!(f, "sqrt({})", sub(a)),
        Expr::Min(a, b) => write!(f, "min({}, {})", sub(a), sub(b)),
        Expr::Max(a, b) => write!(f, "max({}, {})", sub(a), sub(b)),
        Expr::Cmp(op, a, b) => write!(f, "({} {} {})", sub(a), op.symbol(), sub(b)),
        Expr::And(a, b) => write!(f, "({} && {})", sub(a), sub(b)),
        Expr::Or(a, b) => write!(f, "({} || {})", sub(a), sub(b)),
        Expr::Not(a) => write!(f, "!{}", sub(a)),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, None, f)
    }
}

impl Expr {
    /// Render with variable names instead of `v<i>` placeholders.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        DisplayWith {
            expr: self,
            names: Some(names),
        }
    }
}
