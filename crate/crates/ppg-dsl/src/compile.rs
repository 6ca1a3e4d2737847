//! Translation from the surface AST to a program graph.
//!
//! The compiler works right to left through each statement sequence,
//! threading a continuation of the form "run these kernel steps, then
//! jump to checkpoint X". Maximal conditioning-free straight-line code
//! therefore collapses into a single transition; fresh checkpoints are
//! created only by `observe`/`score`, `if` branch points, and `while`
//! loop heads.
//!
//! Two shape rules keep the graphs as small as the drawn examples:
//!
//! * **Scored loop heads** — a `while` body that is straight-line except
//!   for a trailing run of `observe`/`score` statements becomes a single
//!   self-loop transition whose scores sit on the loop head itself. The
//!   score then applies at *every* arrival, including loop entry and the
//!   final (exiting) arrival; sources are expected to arrange the entry
//!   store so the entry score is 1 (all bundled models do).
//! * **Guard folding** — an unscored checkpoint whose only incoming
//!   transition carries no kernel steps is merged into its predecessor
//!   by conjoining guards (this removes the empty hop a loop whose body
//!   starts with `if` would otherwise pay every iteration).
//!
//! Consecutive `observe`/`score` statements merge into one checkpoint
//! carrying the product of their scores, which stays in [0, 1].

use crate::ast::{BinOp, Pos, ProgramAst, ScoreArg, Stmt, SurfaceDist, SurfaceExpr};
use crate::DslError;
use ppg_core::{
    density, CheckpointId, DistributionSpec, Expr, KernelAction, Ppg, ScoreSpec, Step, Transition,
};
use std::collections::HashMap;

const START: CheckpointId = 0;
const NIL: CheckpointId = 1;

/// A compiled program: the graph plus the lowered `return` expression.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub ppg: Ppg,
    /// Lowered `return` expression, if the source had one.
    pub target: Option<Expr>,
    /// Start checkpoint (always 0; nil is always 1).
    pub start: CheckpointId,
}

pub fn compile(ast: &ProgramAst) -> Result<Compiled, DslError> {
    let mut c = Compiler::new();
    c.collect_vars(&ast.stmts);
    if let Some(ret) = &ast.ret {
        c.collect_expr_vars(ret);
    }

    let tail = Cont {
        steps: Vec::new(),
        target: NIL,
    };
    let entry = c.compile_seq(&ast.stmts, tail)?;
    c.transitions.push(Transition {
        source: START,
        guard: Expr::truth(),
        kernel: KernelAction { steps: entry.steps },
        target: entry.target,
    });
    c.transitions.push(Transition {
        source: NIL,
        guard: Expr::truth(),
        kernel: KernelAction::identity(),
        target: NIL,
    });

    c.fold_empty_hops();

    let target = match &ast.ret {
        Some(e) => Some(c.lower_expr(e)?),
        None => None,
    };

    let scores: Vec<(CheckpointId, ScoreSpec)> = c
        .scores
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.clone().map(|s| (i as CheckpointId, s)))
        .collect();
    let ppg = Ppg::new(c.vars, c.names, c.transitions, NIL, scores)
        .map_err(|e| DslError::Graph(e.to_string()))?;
    Ok(Compiled {
        ppg,
        target,
        start: START,
    })
}

/// "Run `steps`, then continue at `target`."
#[derive(Clone)]
struct Cont {
    steps: Vec<Step>,
    target: CheckpointId,
}

struct Compiler {
    vars: Vec<String>,
    var_ix: HashMap<String, usize>,
    names: Vec<String>,
    scores: Vec<Option<ScoreSpec>>,
    transitions: Vec<Transition>,
    /// Checkpoints created by observe/score that later conditioning
    /// statements may merge into (product score).
    mergeable: Vec<bool>,
    obs_count: usize,
    branch_count: usize,
    loop_count: usize,
}

impl Compiler {
    fn new() -> Self {
        Compiler {
            vars: Vec::new(),
            var_ix: HashMap::new(),
            names: vec!["start".into(), "nil".into()],
            scores: vec![None, None],
            transitions: Vec::new(),
            mergeable: vec![false, false],
            obs_count: 0,
            branch_count: 0,
            loop_count: 0,
        }
    }

    // ---- variable slots, in first-use (source) order ----

    fn collect_vars(&mut self, stmts: &[Stmt]) {
        for s in stmts {
            match s {
                Stmt::Sample { name, dist, .. } => {
                    self.intern(name);
                    for a in &dist.args {
                        self.collect_expr_vars(a);
                    }
                }
                Stmt::Assign { name, value, .. } => {
                    self.intern(name);
                    self.collect_expr_vars(value);
                }
                Stmt::Observe { pred, .. } => self.collect_expr_vars(pred),
                Stmt::Score { arg, .. } => match arg {
                    ScoreArg::Clamped(e) => self.collect_expr_vars(e),
                    ScoreArg::DensityRatio { dist, value } => {
                        for a in &dist.args {
                            self.collect_expr_vars(a);
                        }
                        self.collect_expr_vars(value);
                    }
                },
                Stmt::If {
                    cond,
                    then_branch,
                    else_branch,
                    ..
                } => {
                    self.collect_expr_vars(cond);
                    self.collect_vars(then_branch);
                    self.collect_vars(else_branch);
                }
                Stmt::While { cond, body, .. } => {
                    self.collect_expr_vars(cond);
                    self.collect_vars(body);
                }
                Stmt::Skip => {}
            }
        }
    }

    fn collect_expr_vars(&mut self, e: &SurfaceExpr) {
        match e {
            SurfaceExpr::Num(_) => {}
            SurfaceExpr::Ident(name, _) => {
                self.intern(name);
            }
            SurfaceExpr::Binary { lhs, rhs, .. } => {
                self.collect_expr_vars(lhs);
                self.collect_expr_vars(rhs);
            }
            SurfaceExpr::Not(e) | SurfaceExpr::Neg(e) | SurfaceExpr::Abs(e) => {
                self.collect_expr_vars(e)
            }
            SurfaceExpr::Call { args, .. } => {
                for a in args {
                    self.collect_expr_vars(a);
                }
            }
        }
    }

    fn intern(&mut self, name: &str) -> usize {
        if let Some(&ix) = self.var_ix.get(name) {
            return ix;
        }
        let ix = self.vars.len();
        self.vars.push(name.to_string());
        self.var_ix.insert(name.to_string(), ix);
        ix
    }

    fn fresh(&mut self, kind: &str, score: Option<ScoreSpec>, mergeable: bool) -> CheckpointId {
        let count = match kind {
            "obs" => {
                self.obs_count += 1;
                self.obs_count - 1
            }
            "branch" => {
                self.branch_count += 1;
                self.branch_count - 1
            }
            _ => {
                self.loop_count += 1;
                self.loop_count - 1
            }
        };
        let id = self.names.len() as CheckpointId;
        self.names.push(format!("{kind}{count}"));
        self.scores.push(score);
        self.mergeable.push(mergeable);
        id
    }

    // ---- statement compilation ----

    fn compile_seq(&mut self, stmts: &[Stmt], k: Cont) -> Result<Cont, DslError> {
        let mut cont = k;
        for s in stmts.iter().rev() {
            cont = self.compile_stmt(s, cont)?;
        }
        Ok(cont)
    }

    fn compile_stmt(&mut self, s: &Stmt, k: Cont) -> Result<Cont, DslError> {
        match s {
            Stmt::Skip => Ok(k),
            Stmt::Assign { name, value, .. } => {
                let step = Step::Assign {
                    target: self.intern(name),
                    value: self.lower_expr(value)?,
                };
                Ok(prepend(step, k))
            }
            Stmt::Sample { name, dist, .. } => {
                let step = Step::Sample {
                    target: self.intern(name),
                    dist: self.lower_dist(dist)?,
                };
                Ok(prepend(step, k))
            }
            Stmt::Observe { pred, pos } => {
                let spec = ScoreSpec::Pred(self.lower_pred(pred, *pos, "observe")?);
                Ok(self.emit_conditioning(spec, k))
            }
            Stmt::Score { arg, pos } => {
                let spec = self.lower_score_arg(arg, *pos)?;
                Ok(self.emit_conditioning(spec, k))
            }
            Stmt::If {
                cond,
                pos,
                then_branch,
                else_branch,
            } => {
                let guard = self.lower_pred(cond, *pos, "if")?;
                let then_cont = self.compile_seq(then_branch, k.clone())?;
                let else_cont = self.compile_seq(else_branch, k)?;
                let b = self.fresh("branch", None, false);
                self.transitions.push(Transition {
                    source: b,
                    guard: guard.clone(),
                    kernel: KernelAction {
                        steps: then_cont.steps,
                    },
                    target: then_cont.target,
                });
                self.transitions.push(Transition {
                    source: b,
                    guard: guard.not(),
                    kernel: KernelAction {
                        steps: else_cont.steps,
                    },
                    target: else_cont.target,
                });
                Ok(Cont {
                    steps: Vec::new(),
                    target: b,
                })
            }
            Stmt::While { cond, pos, body } => {
                let guard = self.lower_pred(cond, *pos, "while")?;
                let l = if let Some((pure, tail)) = split_scored_tail(body) {
                    // Scored loop head: one self-loop transition, scores
                    // on the head itself.
                    let mut specs = Vec::with_capacity(tail.len());
                    for s in tail {
                        specs.push(match s {
                            Stmt::Observe { pred, pos } => {
                                ScoreSpec::Pred(self.lower_pred(pred, *pos, "observe")?)
                            }
                            Stmt::Score { arg, pos } => self.lower_score_arg(arg, *pos)?,
                            _ => unreachable!("split_scored_tail returns conditioning only"),
                        });
                    }
                    let l = self.fresh("loop", Some(product(specs)), false);
                    let body_steps = self.lower_straight_line(pure)?;
                    self.transitions.push(Transition {
                        source: l,
                        guard: guard.clone(),
                        kernel: KernelAction { steps: body_steps },
                        target: l,
                    });
                    l
                } else {
                    let l = self.fresh("loop", None, false);
                    let body_cont = self.compile_seq(
                        body,
                        Cont {
                            steps: Vec::new(),
                            target: l,
                        },
                    )?;
                    self.transitions.push(Transition {
                        source: l,
                        guard: guard.clone(),
                        kernel: KernelAction {
                            steps: body_cont.steps,
                        },
                        target: body_cont.target,
                    });
                    l
                };
                self.transitions.push(Transition {
                    source: l,
                    guard: guard.not(),
                    kernel: KernelAction { steps: k.steps },
                    target: k.target,
                });
                Ok(Cont {
                    steps: Vec::new(),
                    target: l,
                })
            }
        }
    }

    /// Route the current segment through a scored checkpoint, merging
    /// with an immediately following conditioning checkpoint when no
    /// kernel steps separate them.
    fn emit_conditioning(&mut self, spec: ScoreSpec, k: Cont) -> Cont {
        if k.steps.is_empty() && self.mergeable[k.target as usize] {
            let old = self.scores[k.target as usize]
                .take()
                .expect("mergeable checkpoints are scored");
            let mut parts = vec![spec];
            match old {
                ScoreSpec::Product(rest) => parts.extend(rest),
                other => parts.push(other),
            }
            self.scores[k.target as usize] = Some(product(parts));
            return Cont {
                steps: Vec::new(),
                target: k.target,
            };
        }
        let c = self.fresh("obs", Some(spec), true);
        self.transitions.push(Transition {
            source: c,
            guard: Expr::truth(),
            kernel: KernelAction { steps: k.steps },
            target: k.target,
        });
        Cont {
            steps: Vec::new(),
            target: c,
        }
    }

    fn lower_straight_line(&mut self, stmts: &[Stmt]) -> Result<Vec<Step>, DslError> {
        let mut steps = Vec::new();
        for s in stmts {
            match s {
                Stmt::Assign { name, value, .. } => steps.push(Step::Assign {
                    target: self.intern(name),
                    value: self.lower_expr(value)?,
                }),
                Stmt::Sample { name, dist, .. } => steps.push(Step::Sample {
                    target: self.intern(name),
                    dist: self.lower_dist(dist)?,
                }),
                Stmt::Skip => {}
                _ => unreachable!("caller guarantees straight-line code"),
            }
        }
        Ok(steps)
    }

    // ---- expression lowering ----

    fn lower_expr(&mut self, e: &SurfaceExpr) -> Result<Expr, DslError> {
        Ok(match e {
            SurfaceExpr::Num(n) => Expr::lit(*n),
            SurfaceExpr::Ident(name, _) => Expr::var(self.intern(name)),
            SurfaceExpr::Binary { op, lhs, rhs } => {
                let l = self.lower_expr(lhs)?;
                let r = self.lower_expr(rhs)?;
                match op {
                    BinOp::Add => l.add(r),
                    BinOp::Sub => l.sub(r),
                    BinOp::Mul => l.mul(r),
                    BinOp::Div => l.div(r),
                    BinOp::Eq => l.eq(r),
                    BinOp::Ne => l.eq(r).not(),
                    BinOp::Lt => l.lt(r),
                    BinOp::Le => l.le(r),
                    BinOp::Gt => l.gt(r),
                    BinOp::Ge => l.ge(r),
                    BinOp::And => l.and(r),
                    BinOp::Or => l.or(r),
                }
            }
            SurfaceExpr::Not(e) => self.lower_expr(e)?.not(),
            SurfaceExpr::Neg(e) => Expr::lit(0.0).sub(self.lower_expr(e)?),
            SurfaceExpr::Abs(e) => self.lower_expr(e)?.abs(),
            SurfaceExpr::Call { name, pos, args } => {
                let arity = |want: usize| -> Result<(), DslError> {
                    if args.len() == want {
                        Ok(())
                    } else {
                        Err(DslError::Syntax {
                            pos: *pos,
                            message: format!(
                                "`{name}` takes {want} argument(s), got {}",
                                args.len()
                            ),
                        })
                    }
                };
                match name.as_str() {
                    "sqrt" => {
                        arity(1)?;
                        Expr::Sqrt(Box::new(self.lower_expr(&args[0])?))
                    }
                    "min" => {
                        arity(2)?;
                        Expr::Min(
                            Box::new(self.lower_expr(&args[0])?),
                            Box::new(self.lower_expr(&args[1])?),
                        )
                    }
                    "max" => {
                        arity(2)?;
                        Expr::Max(
                            Box::new(self.lower_expr(&args[0])?),
                            Box::new(self.lower_expr(&args[1])?),
                        )
                    }
                    _ => {
                        return Err(DslError::Syntax {
                            pos: *pos,
                            message: format!(
                                "unknown function `{name}` (expected sqrt, min or max)"
                            ),
                        })
                    }
                }
            }
        })
    }

    /// Lower a condition and require it to be predicate-shaped (guards
    /// and observation scores must be 0/1-valued by construction).
    fn lower_pred(&mut self, e: &SurfaceExpr, pos: Pos, what: &str) -> Result<Expr, DslError> {
        let lowered = self.lower_expr(e)?;
        if !ppg_core::is_predicate(&lowered) {
            return Err(DslError::NotAPredicate {
                pos,
                what: what.to_string(),
            });
        }
        Ok(lowered)
    }

    fn lower_dist(&mut self, d: &SurfaceDist) -> Result<DistributionSpec, DslError> {
        let mut args: Vec<Expr> = d
            .args
            .iter()
            .map(|a| self.lower_expr(a))
            .collect::<Result<_, _>>()?;
        let got = args.len();
        let arity = |want: usize| -> Result<(), DslError> {
            if got == want {
                Ok(())
            } else {
                Err(DslError::Syntax {
                    pos: d.pos,
                    message: format!("`{}` takes {want} argument(s), got {got}", d.name),
                })
            }
        };
        Ok(match d.name.as_str() {
            "B" => {
                arity(1)?;
                DistributionSpec::Bernoulli { p: args.remove(0) }
            }
            "U" => {
                arity(2)?;
                let hi = args.pop().unwrap();
                let lo = args.pop().unwrap();
                DistributionSpec::Uniform { lo, hi }
            }
            "N" => {
                arity(2)?;
                let sd = args.pop().unwrap();
                let mean = args.pop().unwrap();
                DistributionSpec::Normal { mean, sd }
            }
            // N_T(a, b, c, d): window [a, b], mean c, standard deviation d.
            "N_T" => {
                arity(4)?;
                let sd = args.pop().unwrap();
                let mean = args.pop().unwrap();
                let hi = args.pop().unwrap();
                let lo = args.pop().unwrap();
                DistributionSpec::TruncNormal { lo, hi, mean, sd }
            }
            "DU" => {
                if args.is_empty() {
                    return Err(DslError::Syntax {
                        pos: d.pos,
                        message: "`DU` needs at least one item".into(),
                    });
                }
                DistributionSpec::DiscreteUniform { items: args }
            }
            other => {
                return Err(DslError::UnknownDistribution {
                    pos: d.pos,
                    name: other.to_string(),
                })
            }
        })
    }

    fn lower_score_arg(&mut self, arg: &ScoreArg, pos: Pos) -> Result<ScoreSpec, DslError> {
        Ok(match arg {
            ScoreArg::Clamped(e) => ScoreSpec::Clamped(self.lower_expr(e)?),
            ScoreArg::DensityRatio { dist, value } => {
                let d = self.lower_dist(dist)?;
                let modal = match &d {
                    DistributionSpec::Normal {
                        sd: Expr::Lit(sd), ..
                    } if sd.is_finite() && *sd > 0.0 => {
                        // Peak density depends only on sd; computing it
                        // through the same density routine the engine uses
                        // makes the ratio at the mode exactly 1.
                        density(
                            &DistributionSpec::Normal {
                                mean: Expr::lit(0.0),
                                sd: Expr::lit(*sd),
                            },
                            &[],
                            0.0,
                        )
                    }
                    _ => {
                        return Err(DslError::Syntax {
                            pos,
                            message:
                                "density_ratio requires N(mean, sd) with a positive literal sd"
                                    .into(),
                        })
                    }
                };
                ScoreSpec::DensityRatio {
                    dist: d,
                    at: self.lower_expr(value)?,
                    normalizer: Expr::lit(modal),
                }
            }
        })
    }

    // ---- guard folding ----

    /// Merge every unscored checkpoint whose single incoming transition
    /// carries no kernel steps into its predecessor (guard conjunction).
    fn fold_empty_hops(&mut self) {
        loop {
            let Some((victim, in_edge)) = self.find_foldable() else {
                return;
            };
            let hop = self.transitions.remove(in_edge);
            let outgoing: Vec<Transition> = self
                .transitions
                .iter()
                .filter(|t| t.source == victim)
                .cloned()
                .collect();
            self.transitions.retain(|t| t.source != victim);
            let mut insert_at = in_edge.min(self.transitions.len());
            for out in outgoing {
                self.transitions.insert(
                    insert_at,
                    Transition {
                        source: hop.source,
                        guard: hop.guard.clone().and(out.guard),
                        kernel: out.kernel,
                        target: out.target,
                    },
                );
                insert_at += 1;
            }
            // Drop the checkpoint and compact ids above it.
            let v = victim as usize;
            self.names.remove(v);
            self.scores.remove(v);
            self.mergeable.remove(v);
            for t in &mut self.transitions {
                if t.source > victim {
                    t.source -= 1;
                }
                if t.target > victim {
                    t.target -= 1;
                }
            }
        }
    }

    fn find_foldable(&self) -> Option<(CheckpointId, usize)> {
        'next: for id in 2..self.names.len() as CheckpointId {
            if self.scores[id as usize].is_some() {
                continue;
            }
            let mut found: Option<usize> = None;
            for (i, t) in self.transitions.iter().enumerate() {
                if t.target != id {
                    continue;
                }
                if t.source == id || found.is_some() || !t.kernel.is_identity() {
                    continue 'next;
                }
                found = Some(i);
            }
            if let Some(i) = found {
                return Some((id, i));
            }
        }
        None
    }
}

fn prepend(step: Step, mut k: Cont) -> Cont {
    k.steps.insert(0, step);
    k
}

fn product(mut specs: Vec<ScoreSpec>) -> ScoreSpec {
    if specs.len() == 1 {
        specs.pop().unwrap()
    } else {
        ScoreSpec::Product(specs)
    }
}

/// Split a loop body into a pure straight-line prefix and a trailing run
/// of conditioning statements. Returns `None` when the body does not
/// have that shape (the general compilation path applies then).
fn split_scored_tail(body: &[Stmt]) -> Option<(&[Stmt], &[Stmt])> {
    let is_cond = |s: &Stmt| matches!(s, Stmt::Observe { .. } | Stmt::Score { .. });
    let is_pure =
        |s: &Stmt| matches!(s, Stmt::Assign { .. } | Stmt::Sample { .. } | Stmt::Skip);
    let tail_start = body
        .iter()
        .rposition(|s| !is_cond(s))
        .map(|i| i + 1)
        .unwrap_or(0);
    if tail_start == body.len() {
        return None; // no trailing conditioning
    }
    if body[..tail_start].iter().all(is_pure) {
        Some((&body[..tail_start], &body[tail_start..]))
    } else {
        None
    }
}

/// Lower a target expression against an existing variable naming
/// (for `--target` overrides; unknown names are errors rather than
/// fresh slots).
pub fn lower_target(e: &SurfaceExpr, var_names: &[String]) -> Result<Expr, DslError> {
    Ok(match e {
        SurfaceExpr::Num(n) => Expr::lit(*n),
        SurfaceExpr::Ident(name, pos) => {
            let ix = var_names
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| DslError::UnknownVariable {
                    pos: *pos,
                    name: name.clone(),
                })?;
            Expr::var(ix)
        }
        SurfaceExpr::Binary { op, lhs, rhs } => {
            let l = lower_target(lhs, var_names)?;
            let r = lower_target(rhs, var_names)?;
            match op {
                BinOp::Add => l.add(r),
                BinOp::Sub => l.sub(r),
                BinOp::Mul => l.mul(r),
                BinOp::Div => l.div(r),
                BinOp::Eq => l.eq(r),
                BinOp::Ne => l.eq(r).not(),
                BinOp::Lt => l.lt(r),
                BinOp::Le => l.le(r),
                BinOp::Gt => l.gt(r),
                BinOp::Ge => l.ge(r),
                BinOp::And => l.and(r),
                BinOp::Or => l.or(r),
            }
        }
        SurfaceExpr::Not(e) => lower_target(e, var_names)?.not(),
        SurfaceExpr::Neg(e) => Expr::lit(0.0).sub(lower_target(e, var_names)?),
        SurfaceExpr::Abs(e) => lower_target(e, var_names)?.abs(),
        SurfaceExpr::Call { name, pos, args } => {
            let mut lowered: Vec<Expr> = args
                .iter()
                .map(|a| lower_target(a, var_names))
                .collect::<Result<_, _>>()?;
            match (name.as_str(), lowered.len()) {
                ("sqrt", 1) => Expr::Sqrt(Box::new(lowered.pop().unwrap())),
                ("min", 2) => {
                    let b = lowered.pop().unwrap();
                    let a = lowered.pop().unwrap();
                    Expr::Min(Box::new(a), Box::new(b))
                }
                ("max", 2) => {
                    let b = lowered.pop().unwrap();
                    let a = lowered.pop().unwrap();
                    Expr::Max(Box::new(a), Box::new(b))
                }
                _ => {
                    return Err(DslError::Syntax {
                        pos: *pos,
                        message: format!("unknown function `{name}` or wrong arity"),
                    })
                }
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn compile_src(src: &str) -> Compiled {
        compile(&parse(src).unwrap()).unwrap()
    }

    #[test]
    fn skip_program_is_two_checkpoints() {
        let c = compile_src("skip");
        assert_eq!(c.ppg.checkpoint_count(), 2);
        assert_eq!(c.ppg.nil(), 1);
        // start → nil plus the nil self-loop
        assert_eq!(c.ppg.transitions().len(), 2);
        assert!(c.ppg.transitions()[0].kernel.is_identity());
    }

    #[test]
    fn conditioned_coin_has_four_checkpoints() {
        let src = "c~B(1/2);\nif (c==0) skip\nelse {\n    d~B(1/2);\n    observe(d==1);\n    skip\n}";
        let c = compile_src(src);
        assert_eq!(c.ppg.checkpoint_count(), 4);
        let names = c.ppg.checkpoint_names();
        assert_eq!(names[0], "start");
        assert_eq!(names[1], "nil");
        // One scored checkpoint, carrying [d == 1].
        assert_eq!(c.ppg.score_entries().count(), 1);
        let report = ppg_core::validate_ppg(&c.ppg, 500, 7);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
    }

    #[test]
    fn straight_line_program_is_one_transition() {
        // Segment maximality: no conditioning, no control flow — the whole
        // program is a single transition into nil.
        let c = compile_src("a := 1; b ~ B(0.5); c := a + b; d ~ N(c, 2)");
        assert_eq!(c.ppg.checkpoint_count(), 2);
        let non_nil: Vec<_> = c
            .ppg
            .transitions()
            .iter()
            .filter(|t| t.source != c.ppg.nil())
            .collect();
        assert_eq!(non_nil.len(), 1);
        assert_eq!(non_nil[0].kernel.steps.len(), 4);
        assert_eq!(non_nil[0].target, c.ppg.nil());
    }

    #[test]
    fn trailing_observe_scores_the_loop_head() {
        let src = "x := 0;\nwhile (x < 3) { x := x + 1; observe(x <= 2) }";
        let c = compile_src(src);
        // start, nil, loop — the observe lives on the loop head.
        assert_eq!(c.ppg.checkpoint_count(), 3);
        let loop_id = 2;
        assert!(!matches!(c.ppg.score(loop_id), ScoreSpec::One));
        // Self-loop plus exit.
        let from_loop = c.ppg.transitions_from(loop_id);
        assert_eq!(from_loop.len(), 2);
    }

    #[test]
    fn consecutive_observes_merge_into_a_product() {
        let src = "c ~ B(0.5); d ~ B(0.5); observe(c == 1); observe(d == 1)";
        let c = compile_src(src);
        // start, nil, one merged observation checkpoint.
        assert_eq!(c.ppg.checkpoint_count(), 3);
        match c.ppg.score(2) {
            ScoreSpec::Product(parts) => assert_eq!(parts.len(), 2),
            other => panic!("expected product score, got {other:?}"),
        }
    }

    #[test]
    fn loop_body_starting_with_if_folds_the_empty_hop() {
        let src = "n := 0;\nwhile (n < 4) { if (n == 0) { n := n + 1 } else { n := n + 2 } }";
        let c = compile_src(src);
        // start, nil, loop head; the branch checkpoint folds into the head.
        assert_eq!(c.ppg.checkpoint_count(), 3);
        let from_loop = c.ppg.transitions_from(2);
        // two folded body guards + exit
        assert_eq!(from_loop.len(), 3);
        let report = ppg_core::validate_ppg(&c.ppg, 500, 11);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
    }

    #[test]
    fn variables_are_numbered_in_first_use_order() {
        let c = compile_src("b := a + 1; c ~ B(0.5); a := c");
        assert_eq!(c.ppg.var_names(), &["b", "a", "c"]);
    }

    #[test]
    fn non_predicate_conditions_are_rejected() {
        let err = compile(&parse("x := 1; while (x + 1) { x := 0 }").unwrap()).unwrap_err();
        assert!(matches!(err, DslError::NotAPredicate { .. }));
        let err = compile(&parse("observe(x * 2)").unwrap()).unwrap_err();
        assert!(matches!(err, DslError::NotAPredicate { .. }));
    }

    #[test]
    fn unknown_distribution_is_reported() {
        let err = compile(&parse("x ~ Gamma(1, 2)").unwrap()).unwrap_err();
        match err {
            DslError::UnknownDistribution { name, .. } => assert_eq!(name, "Gamma"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn density_ratio_is_exactly_one_at_the_mode() {
        let src = "x := 5; score(density_ratio(N(x, 0.01), 5))";
        let c = compile_src(src);
        let scored = c.ppg.score_entries().next().unwrap().0;
        let w = ppg_core::score_at(&c.ppg, scored, &[5.0]);
        assert_eq!(w, 1.0);
    }

    #[test]
    fn return_expression_is_lowered_against_the_var_map() {
        let c = compile_src("x ~ B(0.5); y := x + 1; return max(y, 0)");
        let t = c.target.unwrap();
        // y has slot 1
        assert_eq!(t, Expr::Max(Box::new(Expr::var(1)), Box::new(Expr::lit(0.0))));
    }

    #[test]
    fn target_override_rejects_unknown_names() {
        let c = compile_src("x ~ B(0.5)");
        let e = crate::parser::parse_expr("x + z").unwrap();
        let err = lower_target(&e, c.ppg.var_names()).unwrap_err();
        match err {
            DslError::UnknownVariable { name, .. } => assert_eq!(name, "z"),
            other => panic!("{other:?}"),
        }
    }
}
