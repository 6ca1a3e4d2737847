//! Surface syntax tree produced by the parser.
//!
//! The surface language is a small imperative notation: implicit scalar
//! variables, `~` for sampling, `:=`/`=` for assignment, `observe`/`score`
//! for conditioning, structured `if`/`while`, and a final `return`
//! expression naming the quantity a run should estimate. Variables spring
//! into existence on first write and are read as 0 before that.

/// Source position, 1-based, for diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Binary operators of the surface expression grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

/// Surface expressions. Identifiers are still names here; the compiler
/// assigns store indices in first-use order.
#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceExpr {
    Num(f64),
    Ident(String, Pos),
    Binary {
        op: BinOp,
        lhs: Box<SurfaceExpr>,
        rhs: Box<SurfaceExpr>,
    },
    /// Logical negation `!e`.
    Not(Box<SurfaceExpr>),
    /// Arithmetic negation `-e`.
    Neg(Box<SurfaceExpr>),
    /// Absolute value `|e|`.
    Abs(Box<SurfaceExpr>),
    /// `sqrt(e)`, `min(a, b)`, `max(a, b)`.
    Call {
        name: String,
        pos: Pos,
        args: Vec<SurfaceExpr>,
    },
}

/// A distribution literal `Name(arg, ...)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceDist {
    pub name: String,
    pub pos: Pos,
    pub args: Vec<SurfaceExpr>,
}

/// The argument of a `score(...)` statement.
#[derive(Clone, Debug, PartialEq)]
pub enum ScoreArg {
    /// `score(e)`: e clamped into [0, 1].
    Clamped(SurfaceExpr),
    /// `score(density_ratio(dist, value))`: the density of `dist` at
    /// `value`, normalized by the density at the mode.
    DensityRatio {
        dist: SurfaceDist,
        value: SurfaceExpr,
    },
}

/// Statements.
#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    /// `x ~ Dist(...)`.
    Sample {
        name: String,
        pos: Pos,
        dist: SurfaceDist,
    },
    /// `x := e` (also written `x = e`).
    Assign {
        name: String,
        pos: Pos,
        value: SurfaceExpr,
    },
    /// `observe(p)`: multiply the weight by the 0/1 value of `p`.
    Observe { pred: SurfaceExpr, pos: Pos },
    /// `score(...)`: multiply the weight by a [0, 1] factor.
    Score { arg: ScoreArg, pos: Pos },
    If {
        cond: SurfaceExpr,
        pos: Pos,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
    },
    While {
        cond: SurfaceExpr,
        pos: Pos,
        body: Vec<Stmt>,
    },
    Skip,
}

/// A parsed program: statements plus the optional trailing
/// `return` expression (the model's default estimation target).
#[derive(Clone, Debug, PartialEq)]
pub struct ProgramAst {
    pub stmts: Vec<Stmt>,
    pub ret: Option<SurfaceExpr>,
}
