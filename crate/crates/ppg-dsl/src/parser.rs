//! Recursive-descent parser (the grammar is LL; see `pp.ebnf`).

use crate::ast::{BinOp, ProgramAst, ScoreArg, Stmt, SurfaceDist, SurfaceExpr};
use crate::lexer::{lex, Tok, Token};
use crate::DslError;

pub fn parse(source: &str) -> Result<ProgramAst, DslError> {
    let tokens = lex(source)?;
    let mut p = Parser { tokens, at: 0 };
    p.program()
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok) -> Result<Token, DslError> {
        let t = self.next();
        if &t.tok == want {
            Ok(t)
        } else {
            Err(DslError::Syntax {
                pos: t.pos,
                message: format!("expected {}, found {}", want, t.tok),
            })
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if &self.peek().tok == want {
            self.next();
            true
        } else {
            false
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn program(&mut self) -> Result<ProgramAst, DslError> {
        let stmts = self.stmt_list(true)?;
        let ret = if self.is_kw("return") {
            self.next();
            let e = self.expr()?;
            self.eat(&Tok::Semi);
            Some(e)
        } else {
            None
        };
        let t = self.peek();
        if t.tok != Tok::Eof {
            return Err(DslError::Syntax {
                pos: t.pos,
                message: format!("expected a statement or end of input, found {}", t.tok),
            });
        }
        Ok(ProgramAst { stmts, ret })
    }

    /// Statements until a closer (`}`, `return` at top level, or EOF).
    /// Semicolons between statements are optional.
    fn stmt_list(&mut self, top_level: bool) -> Result<Vec<Stmt>, DslError> {
        let mut out = Vec::new();
        loop {
            while self.eat(&Tok::Semi) {}
            let t = self.peek();
            match &t.tok {
                Tok::Eof | Tok::RBrace => return Ok(out),
                Tok::Ident(s) if s == "return" => {
                    if top_level {
                        return Ok(out);
                    }
                    return Err(DslError::Syntax {
                        pos: t.pos,
                        message: "`return` is only allowed at the end of the program".into(),
                    });
                }
                _ => out.push(self.statement()?),
            }
        }
    }

    fn statement(&mut self) -> Result<Stmt, DslError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Ident(kw) if kw == "skip" => {
                self.next();
                Ok(Stmt::Skip)
            }
            Tok::Ident(kw) if kw == "observe" => {
                self.next();
                self.expect(&Tok::LParen)?;
                let pred = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(Stmt::Observe { pred, pos: t.pos })
            }
            Tok::Ident(kw) if kw == "score" => {
                self.next();
                self.expect(&Tok::LParen)?;
                let arg = if self.is_kw("density_ratio") {
                    self.next();
                    self.expect(&Tok::LParen)?;
                    let dist = self.dist()?;
                    self.expect(&Tok::Comma)?;
                    let value = self.expr()?;
                    self.expect(&Tok::RParen)?;
                    ScoreArg::DensityRatio { dist, value }
                } else {
                    ScoreArg::Clamped(self.expr()?)
                };
                self.expect(&Tok::RParen)?;
                Ok(Stmt::Score { arg, pos: t.pos })
            }
            Tok::Ident(kw) if kw == "if" => {
                self.next();
                self.expect(&Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(&Tok::RParen)?;
                let then_branch = self.arm()?;
                let else_branch = if self.is_kw("else") {
                    self.next();
                    self.arm()?
                } else {
                    Vec::new()
                };
                Ok(Stmt::If {
                    cond,
                    pos: t.pos,
                    then_branch,
                    else_branch,
                })
            }
            Tok::Ident(kw) if kw == "while" => {
                self.next();
                self.expect(&Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(&Tok::RParen)?;
                self.expect(&Tok::LBrace)?;
                let body = self.stmt_list(false)?;
                self.expect(&Tok::RBrace)?;
                Ok(Stmt::While {
                    cond,
                    pos: t.pos,
                    body,
                })
            }
            Tok::Ident(name) => {
                let name = name.clone();
                self.next();
                match self.peek().tok.clone() {
                    Tok::Tilde => {
                        self.next();
                        let dist = self.dist()?;
                        Ok(Stmt::Sample {
                            name,
                            pos: t.pos,
                            dist,
                        })
                    }
                    Tok::Walrus | Tok::Assign => {
                        self.next();
                        let value = self.expr()?;
                        Ok(Stmt::Assign {
                            name,
                            pos: t.pos,
                            value,
                        })
                    }
                    other => Err(DslError::Syntax {
                        pos: self.peek().pos,
                        message: format!(
                            "expected `~`, `:=` or `=` after `{name}`, found {other}"
                        ),
                    }),
                }
            }
            other => Err(DslError::Syntax {
                pos: t.pos,
                message: format!("expected a statement, found {other}"),
            }),
        }
    }

    /// An `if`/`else` arm: a braced block or a single statement
    /// (so `if (c==0) skip` parses as written).
    fn arm(&mut self) -> Result<Vec<Stmt>, DslError> {
        if self.eat(&Tok::LBrace) {
            let body = self.stmt_list(false)?;
            self.expect(&Tok::RBrace)?;
            Ok(body)
        } else {
            Ok(vec![self.statement()?])
        }
    }

    fn dist(&mut self) -> Result<SurfaceDist, DslError> {
        let t = self.next();
        let name = match t.tok {
            Tok::Ident(s) => s,
            other => {
                return Err(DslError::Syntax {
                    pos: t.pos,
                    message: format!("expected a distribution name, found {other}"),
                })
            }
        };
        self.expect(&Tok::LParen)?;
        let mut args = Vec::new();
        if self.peek().tok != Tok::RParen {
            loop {
                args.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen)?;
        Ok(SurfaceDist {
            name,
            pos: t.pos,
            args,
        })
    }

    // ---- expressions (precedence climbing) ----

    fn expr(&mut self) -> Result<SurfaceExpr, DslError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<SurfaceExpr, DslError> {
        let mut lhs = self.and_expr()?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.and_expr()?;
            lhs = bin(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<SurfaceExpr, DslError> {
        let mut lhs = self.cmp_expr()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.cmp_expr()?;
            lhs = bin(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    /// Comparisons are non-associative. A bare `=` in expression position
    /// means equality (pseudo-code style `observe(d = 1)`).
    fn cmp_expr(&mut self) -> Result<SurfaceExpr, DslError> {
        let lhs = self.add_expr()?;
        let op = match self.peek().tok {
            Tok::EqEq | Tok::Assign => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.next();
        let rhs = self.add_expr()?;
        Ok(bin(op, lhs, rhs))
    }

    fn add_expr(&mut self) -> Result<SurfaceExpr, DslError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.mul_expr()?;
            lhs = bin(op, lhs, rhs);
        }
    }

    fn mul_expr(&mut self) -> Result<SurfaceExpr, DslError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.unary_expr()?;
            lhs = bin(op, lhs, rhs);
        }
    }

    fn unary_expr(&mut self) -> Result<SurfaceExpr, DslError> {
        match self.peek().tok {
            Tok::Minus => {
                self.next();
                Ok(SurfaceExpr::Neg(Box::new(self.unary_expr()?)))
            }
            Tok::Bang => {
                self.next();
                Ok(SurfaceExpr::Not(Box::new(self.unary_expr()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<SurfaceExpr, DslError> {
        let t = self.next();
        match t.tok {
            Tok::Num(n) => Ok(SurfaceExpr::Num(n)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Pipe => {
                let e = self.expr()?;
                self.expect(&Tok::Pipe)?;
                Ok(SurfaceExpr::Abs(Box::new(e)))
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::LParen {
                    self.next();
                    let mut args = Vec::new();
                    if self.peek().tok != Tok::RParen {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(&Tok::RParen)?;
                    Ok(SurfaceExpr::Call {
                        name,
                        pos: t.pos,
                        args,
                    })
                } else {
                    Ok(SurfaceExpr::Ident(name, t.pos))
                }
            }
            other => Err(DslError::Syntax {
                pos: t.pos,
                message: format!("expected an expression, found {other}"),
            }),
        }
    }
}

fn bin(op: BinOp, lhs: SurfaceExpr, rhs: SurfaceExpr) -> SurfaceExpr {
    SurfaceExpr::Binary {
        op,
        lhs: Box::new(lhs),
        rhs: Box::new(rhs),
    }
}

/// Parse a single expression (used for `--target` overrides).
pub fn parse_expr(source: &str) -> Result<SurfaceExpr, DslError> {
    let tokens = lex(source)?;
    let mut p = Parser { tokens, at: 0 };
    let e = p.expr()?;
    let t = p.peek();
    if t.tok != Tok::Eof {
        return Err(DslError::Syntax {
            pos: t.pos,
            message: format!("unexpected {} after expression", t.tok),
        });
    }
    Ok(e)
}
