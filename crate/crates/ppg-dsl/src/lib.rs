//! Surface language for probabilistic programs.
//!
//! The language covers straight-line assignment and sampling, `observe`
//! and `score` conditioning, `if`/`else`, `while`, and an optional final
//! `return` expression naming the quantity to estimate. `compile` lowers
//! a parsed program to the checkpoint-graph form the engine executes;
//! [`model_zoo`] exposes the bundled benchmark models.
//!
//! A quick tour:
//!
//! ```
//! use ppg_dsl::{compile, parse};
//!
//! let ast = parse("c ~ B(0.5); observe(c == 1); return c").unwrap();
//! let compiled = compile(&ast).unwrap();
//! assert_eq!(compiled.ppg.checkpoint_count(), 3); // start, nil, observe
//! ```
//!
//! The grammar is documented in `pp.ebnf` next to this crate.

mod ast;
mod compile;
mod dot;
mod lexer;
mod parser;
mod zoo;

pub use ast::{BinOp, Pos, ProgramAst, ScoreArg, Stmt, SurfaceDist, SurfaceExpr};
pub use compile::{compile, lower_target, Compiled};
pub use dot::to_dot;
pub use parser::{parse, parse_expr};
pub use zoo::{model_zoo, resolve_model, rw2_source, zc_source, ZooModel};

use thiserror::Error;

/// Errors from parsing or lowering a surface program.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum DslError {
    /// Malformed source text (or a structurally invalid construct such
    /// as a bad arity); `pos` is 1-based line:column.
    #[error("{pos}: {message}")]
    Syntax { pos: Pos, message: String },
    /// A guard or observation whose expression is not predicate-shaped
    /// (guards and observe conditions must evaluate to 0 or 1).
    #[error("{pos}: `{what}` condition must be a predicate (0/1-valued)")]
    NotAPredicate { pos: Pos, what: String },
    /// Distribution name outside the supported set.
    #[error("{pos}: unknown distribution `{name}` (expected B, U, N, N_T or DU)")]
    UnknownDistribution { pos: Pos, name: String },
    /// A target expression referenced a variable the program never uses.
    #[error("{pos}: unknown variable `{name}`")]
    UnknownVariable { pos: Pos, name: String },
    /// `resolve_model` was given a name outside the bundled set.
    #[error("{0}")]
    UnknownModel(String),
    /// The lowered graph failed its structural checks (compiler bug or
    /// a pathological source); carries the underlying message.
    #[error("compiled graph is malformed: {0}")]
    Graph(String),
}
