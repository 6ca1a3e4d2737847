//! JSON serialization of program graphs.
//!
//! The document layout (see `docs/ppg.schema.json` in the repository root):
//!
//! ```json
//! {
//!   "format": "ppg-v1",
//!   "vars": ["c", "d"],
//!   "checkpoints": ["start", "nil", "branch", "obs"],
//!   "nil": 1,
//!   "scores": { "3": ["pred", ["==", ["var", 1], ["lit", 1.0]]] },
//!   "transitions": [
//!     { "source": 0, "guard": ["lit", 1.0],
//!       "kernel": [["sample", 0, ["bernoulli", ["lit", 0.5]]]],
//!       "target": 2 }
//!   ]
//! }
//! ```
//!
//! Expressions, kernel steps, distributions and scores are s-expression
//! style prefix arrays. Variables are referenced by index into `vars`.
//! Non-finite literals are spelled as the strings `"inf"` / `"-inf"`
//! (JSON has no infinity literal).

use crate::dist::DistributionSpec;
use crate::expr::{CmpOp, Expr};
use crate::kernel::{KernelAction, Step};
use crate::ppg::{Ppg, PpgError, Transition};
use crate::score::ScoreSpec;
use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("not valid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("malformed document: {0}")]
    Shape(String),
    #[error(transparent)]
    Graph(#[from] PpgError),
}

fn shape(msg: impl Into<String>) -> JsonError {
    JsonError::Shape(msg.into())
}

// --- serialization ---------------------------------------------------------

fn lit_to_json(x: f64) -> Value {
    if x == f64::INFINITY {
        json!("inf")
    } else if x == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!(x)
    }
}

fn expr_to_json(e: &Expr) -> Value {
    match e {
        Expr::Var(i) => json!(["var", i]),
        Expr::Lit(x) => json!(["lit", lit_to_json(*x)]),
        Expr::Add(a, b) => json!(["+", expr_to_json(a), expr_to_json(b)]),
        Expr::Sub(a, b) => json!(["-", expr_to_json(a), expr_to_json(b)]),
        Expr::Mul(a, b) => json!(["*", expr_to_json(a), expr_to_json(b)]),
        Expr::Div(a, b) => json!(["/", expr_to_json(a), expr_to_json(b)]),
        Expr::Abs(a) => json!(["abs", expr_to_json(a)]),
        Expr::Sqrt(a) => json!(["sqrt", expr_to_json(a)]),
        Expr::Min(a, b) => json!(["min", expr_to_json(a), expr_to_json(b)]),
        Expr::Max(a, b) => json!(["max", expr_to_json(a), expr_to_json(b)]),
        Expr::Cmp(op, a, b) => json!([op.symbol(), expr_to_json(a), expr_to_json(b)]),
        Expr::And(a, b) => json!(["&&", expr_to_json(a), expr_to_json(b)]),
        Expr::Or(a, b) => json!(["||", expr_to_json(a), expr_to_json(b)]),
        Expr::Not(a) => json!(["!", expr_to_json(a)]),
    }
}

fn dist_to_json(d: &DistributionSpec) -> Value {
    match d {
        DistributionSpec::Bernoulli { p } => json!(["bernoulli", expr_to_json(p)]),
        DistributionSpec::Uniform { lo, hi } => {
            json!(["uniform", expr_to_json(lo), expr_to_json(hi)])
        }
        DistributionSpec::Normal { mean, sd } => {
            json!(["normal", expr_to_json(mean), expr_to_json(sd)])
        }
        DistributionSpec::TruncNormal { lo, hi, mean, sd } => json!([
            "trunc_normal",
            expr_to_json(lo),
            expr_to_json(hi),
            expr_to_json(mean),
            expr_to_json(sd)
        ]),
        DistributionSpec::DiscreteUniform { items } => json!([
            "discrete_uniform",
            items.iter().map(expr_to_json).collect::<Vec<_>>()
        ]),
        DistributionSpec::Dirac { value } => json!(["dirac", expr_to_json(value)]),
    }
}

fn step_to_json(s: &Step) -> Value {
    match s {
        Step::Assign { target, value } => json!(["assign", target, expr_to_json(value)]),
        Step::Sample { target, dist } => json!(["sample", target, dist_to_json(dist)]),
    }
}

fn score_to_json(s: &ScoreSpec) -> Value {
    match s {
        ScoreSpec::One => json!(["one"]),
        ScoreSpec::Pred(e) => json!(["pred", expr_to_json(e)]),
        ScoreSpec::Clamped(e) => json!(["clamped", expr_to_json(e)]),
        ScoreSpec::DensityRatio {
            dist,
            at,
            normalizer,
        } => json!([
            "density_ratio",
            dist_to_json(dist),
            expr_to_json(at),
            expr_to_json(normalizer)
        ]),
        ScoreSpec::Product(parts) => json!([
            "product",
            parts.iter().map(score_to_json).collect::<Vec<_>>()
        ]),
    }
}

/// Serialize a graph to the `ppg-v1` JSON document.
pub fn ppg_to_json(g: &Ppg) -> Value {
    let mut scores = Map::new();
    for (checkpoint, spec) in g.score_entries() {
        scores.insert(checkpoint.to_string(), score_to_json(spec));
    }
    json!({
        "format": "ppg-v1",
        "vars": g.var_names(),
        "checkpoints": g.checkpoint_names(),
        "nil": g.nil(),
        "scores": Value::Object(scores),
        "transitions": g
            .transitions()
            .iter()
            .map(|t| {
                json!({
                    "source": t.source,
                    "guard": expr_to_json(&t.guard),
                    "kernel": t.kernel.steps.iter().map(step_to_json).collect::<Vec<_>>(),
                    "target": t.target,
                })
            })
            .collect::<Vec<_>>(),
    })
}

/// Serialize to a pretty-printed string.
pub fn ppg_to_json_string(g: &Ppg) -> String {
    serde_json::to_string_pretty(&ppg_to_json(g)).expect("ppg json never fails to render")
}

// --- deserialization --------------------------------------------------------

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a [Value], JsonError> {
    v.as_array()
        .map(|a| a.as_slice())
        .ok_or_else(|| shape(format!("{what}: expected an array, found {v}")))
}

fn head<'a>(a: &'a [Value], what: &str) -> Result<(&'a str, &'a [Value]), JsonError> {
    let (first, rest) = a
        .split_first()
        .ok_or_else(|| shape(format!("{what}: empty form")))?;
    let tag = first
        .as_str()
        .ok_or_else(|| shape(format!("{what}: tag must be a string, found {first}")))?;
    Ok((tag, rest))
}

fn lit_from_json(v: &Value) -> Result<f64, JsonError> {
    if let Some(x) = v.as_f64() {
        return Ok(x);
    }
    match v.as_str() {
        Some("inf") => Ok(f64::INFINITY),
        Some("-inf") => Ok(f64::NEG_INFINITY),
        _ => Err(shape(format!("literal must be a number or \"inf\"/\"-inf\", found {v}"))),
    }
}

fn usize_from_json(v: &Value, what: &str) -> Result<usize, JsonError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| shape(format!("{what}: expected a non-negative integer, found {v}")))
}

fn expr_from_json(v: &Value) -> Result<Expr, JsonError> {
    let a = as_array(v, "expression")?;
    let (tag, rest) = head(a, "expression")?;
    let unary = |rest: &[Value]| -> Result<Box<Expr>, JsonError> {
        match rest {
            [a] => Ok(Box::new(expr_from_json(a)?)),
            _ => Err(shape(format!("'{tag}' takes 1 argument"))),
        }
    };
    let binary = |rest: &[Value]| -> Result<(Box<Expr>, Box<Expr>), JsonError> {
        match rest {
            [a, b] => Ok((Box::new(expr_from_json(a)?), Box::new(expr_from_json(b)?))),
            _ => Err(shape(format!("'{tag}' takes 2 arguments"))),
        }
    };
    Ok(match tag {
        "var" => match rest {
            [i] => Expr::Var(usize_from_json(i, "var index")?),
            _ => return Err(shape("'var' takes 1 argument")),
        },
        "lit" => match rest {
            [x] => Expr::Lit(lit_from_json(x)?),
            _ => return Err(shape("'lit' takes 1 argument")),
        },
        "+" => {
            let (a, b) = binary(rest)?;
            Expr::Add(a, b)
        }
        "-" => {
            let (a, b) = binary(rest)?;
            Expr::Sub(a, b)
        }
        "*" => {
            let (a, b) = binary(rest)?;
            Expr::Mul(a, b)
        }
        "/" => {
            let (a, b) = binary(rest)?;
            Expr::Div(a, b)
        }
        "abs" => Expr::Abs(unary(rest)?),
        "sqrt" => Expr::Sqrt(unary(rest)?),
        "min" => {
            let (a, b) = binary(rest)?;
            Expr::Min(a, b)
        }
        "max" => {
            let (a, b) = binary(rest)?;
            Expr::Max(a, b)
        }
        "<" | "<=" | "==" | ">=" | ">" => {
            let op = match tag {
                "<" => CmpOp::Lt,
                "<=" => CmpOp::Le,
                "==" => CmpOp::Eq,
                ">=" => CmpOp::Ge,
                _ => CmpOp::Gt,
            };
            let (a, b) = binary(rest)?;
            Expr::Cmp(op, a, b)
        }
        "&&" => {
            let (a, b) = binary(rest)?;
            Expr::And(a, b)
        }
        "||" => {
            let (a, b) = binary(rest)?;
            Expr::Or(a, b)
        }
        "!" => Expr::Not(unary(rest)?),
        other => return Err(shape(format!("unknown expression tag '{other}'"))),
    })
}

fn dist_from_json(v: &Value) -> Result<DistributionSpec, JsonError> {
    let a = as_array(v, "distribution")?;
    let (tag, rest) = head(a, "distribution")?;
    let arity = |n: usize| -> Result<Vec<Expr>, JsonError> {
        if rest.len() != n {
            return Err(shape(format!("'{tag}' takes {n} argument(s)")));
        }
        rest.iter().map(expr_from_json).collect()
    };
    Ok(match tag {
        "bernoulli" => {
            let mut args = arity(1)?;
            DistributionSpec::Bernoulli { p: args.remove(0) }
        }
        "uniform" => {
            let mut args = arity(2)?;
            DistributionSpec::Uniform {
                lo: args.remove(0),
                hi: args.remove(0),
            }
        }
        "normal" => {
            let mut args = arity(2)?;
            DistributionSpec::Normal {
                mean: args.remove(0),
                sd: args.remove(0),
            }
        }
        "trunc_normal" => {
            let mut args = arity(4)?;
            DistributionSpec::TruncNormal {
                lo: args.remove(0),
                hi: args.remove(0),
                mean: args.remove(0),
                sd: args.remove(0),
            }
        }
        "discrete_uniform" => match rest {
            [items] => DistributionSpec::DiscreteUniform {
                items: as_array(items, "discrete_uniform items")?
                    .iter()
                    .map(expr_from_json)
                    .collect::<Result<_, _>>()?,
            },
            _ => return Err(shape("'discrete_uniform' takes 1 argument (the item list)")),
        },
        "dirac" => {
            let mut args = arity(1)?;
            DistributionSpec::Dirac {
                value: args.remove(0),
            }
        }
        other => return Err(shape(format!("unknown distribution tag '{other}'"))),
    })
}

fn step_from_json(v: &Value) -> Result<Step, JsonError> {
    let a = as_array(v, "kernel step")?;
    let (tag, rest) = head(a, "kernel step")?;
    match (tag, rest) {
        ("assign", [target, value]) => Ok(Step::Assign {
            target: usize_from_json(target, "assign target")?,
            value: expr_from_json(value)?,
        }),
        ("sample", [target, dist]) => Ok(Step::Sample {
            target: usize_from_json(target, "sample target")?,
            dist: dist_from_json(dist)?,
        }),
        _ => Err(shape(format!(
            "kernel step must be ['assign', i, expr] or ['sample', i, dist], found tag '{tag}'"
        ))),
    }
}

fn score_from_json(v: &Value) -> Result<ScoreSpec, JsonError> {
    let a = as_array(v, "score")?;
    let (tag, rest) = head(a, "score")?;
    Ok(match (tag, rest) {
        ("one", []) => ScoreSpec::One,
        ("pred", [e]) => ScoreSpec::Pred(expr_from_json(e)?),
        ("clamped", [e]) => ScoreSpec::Clamped(expr_from_json(e)?),
        ("density_ratio", [dist, at, normalizer]) => ScoreSpec::DensityRatio {
            dist: dist_from_json(dist)?,
            at: expr_from_json(at)?,
            normalizer: expr_from_json(normalizer)?,
        },
        ("product", [parts]) => ScoreSpec::Product(
            as_array(parts, "product parts")?
                .iter()
                .map(score_from_json)
                .collect::<Result<_, _>>()?,
        ),
        _ => return Err(shape(format!("unknown or malformed score form '{tag}'"))),
    })
}

fn string_list(v: &Value, what: &str) -> Result<Vec<String>, JsonError> {
    as_array(v, what)?
        .iter()
        .map(|s| {
            s.as_str()
                .map(str::to_owned)
                .ok_or_else(|| shape(format!("{what}: entries must be strings")))
        })
        .collect()
}

/// Parse a `ppg-v1` JSON document. Structural problems (bad indices) are
/// hard errors, as everywhere.
pub fn ppg_from_json(text: &str) -> Result<Ppg, JsonError> {
    let doc: Value = serde_json::from_str(text)?;
    let obj = doc
        .as_object()
        .ok_or_else(|| shape("top level must be an object"))?;
    match obj.get("format").and_then(Value::as_str) {
        Some("ppg-v1") => {}
        other => {
            return Err(shape(format!(
                "format must be \"ppg-v1\", found {other:?}"
            )))
        }
    }
    let field = |name: &str| -> Result<&Value, JsonError> {
        obj.get(name)
            .ok_or_else(|| shape(format!("missing field '{name}'")))
    };

    let vars = string_list(field("vars")?, "vars")?;
    let checkpoints = string_list(field("checkpoints")?, "checkpoints")?;
    let nil = field("nil")?
        .as_u64()
        .ok_or_else(|| shape("nil must be a checkpoint index"))? as u32;

    let mut scores = Vec::new();
    if let Some(map) = obj.get("scores") {
        let map = map
            .as_object()
            .ok_or_else(|| shape("scores must be an object keyed by checkpoint index"))?;
        for (key, spec) in map {
            let checkpoint: u32 = key
                .parse()
                .map_err(|_| shape(format!("score key '{key}' is not a checkpoint index")))?;
            scores.push((checkpoint, score_from_json(spec)?));
        }
        // Object iteration order is implementation-defined; make the
        // constructor input deterministic.
        scores.sort_by_key(|(c, _)| *c);
    }

    let mut transitions = Vec::new();
    for (i, t) in as_array(field("transitions")?, "transitions")?.iter().enumerate() {
        let t = t
            .as_object()
            .ok_or_else(|| shape(format!("transition {i} must be an object")))?;
        let get = |name: &str| -> Result<&Value, JsonError> {
            t.get(name)
                .ok_or_else(|| shape(format!("transition {i}: missing field '{name}'")))
        };
        transitions.push(Transition {
            source: usize_from_json(get("source")?, "source")? as u32,
            guard: expr_from_json(get("guard")?)?,
            kernel: KernelAction::new(
                as_array(get("kernel")?, "kernel")?
                    .iter()
                    .map(step_from_json)
                    .collect::<Result<_, _>>()?,
            ),
            target: usize_from_json(get("target")?, "target")? as u32,
        });
    }

    Ok(Ppg::new(vars, checkpoints, transitions, nil, scores)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn sample_graph() -> Ppg {
        Ppg::new(
            vec!["c".into(), "d".into()],
            vec!["start".into(), "nil".into(), "branch".into(), "obs".into()],
            vec![
                Transition {
                    source: 0,
                    guard: Expr::truth(),
                    kernel: KernelAction::new(vec![Step::Sample {
                        target: 0,
                        dist: DistributionSpec::Bernoulli { p: Expr::lit(0.5) },
                    }]),
                    target: 2,
                },
                Transition {
                    source: 2,
                    guard: Expr::var(0).eq(Expr::lit(0.0)),
                    kernel: KernelAction::identity(),
                    target: 1,
                },
                Transition {
                    source: 2,
                    guard: Expr::var(0).eq(Expr::lit(0.0)).not(),
                    kernel: KernelAction::new(vec![Step::Sample {
                        target: 1,
                        dist: DistributionSpec::Bernoulli { p: Expr::lit(0.5) },
                    }]),
                    target: 3,
                },
                Transition {
                    source: 3,
                    guard: Expr::truth(),
                    kernel: KernelAction::identity(),
                    target: 1,
                },
                Transition {
                    source: 1,
                    guard: Expr::truth(),
                    kernel: KernelAction::identity(),
                    target: 1,
                },
            ],
            1,
            vec![(3, ScoreSpec::Pred(Expr::var(1).eq(Expr::lit(1.0))))],
        )
        .unwrap()
    }

    #[test]
    fn round_trip() {
        let g = sample_graph();
        let text = ppg_to_json_string(&g);
        let back = ppg_from_json(&text).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn infinity_literals_round_trip() {
        let g = Ppg::new(
            vec!["x".into()],
            vec!["start".into(), "nil".into()],
            vec![
                Transition {
                    source: 0,
                    guard: Expr::truth(),
                    kernel: KernelAction::new(vec![Step::Assign {
                        target: 0,
                        value: Expr::lit(f64::NEG_INFINITY),
                    }]),
                    target: 1,
                },
                Transition {
                    source: 1,
                    guard: Expr::truth(),
                    kernel: KernelAction::identity(),
                    target: 1,
                },
            ],
            1,
            vec![],
        )
        .unwrap();
        let back = ppg_from_json(&ppg_to_json_string(&g)).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn rejects_unknown_tags() {
        let text = r#"{
            "format": "ppg-v1",
            "vars": ["x"],
            "checkpoints": ["start", "nil"],
            "nil": 1,
            "scores": {},
            "transitions": [
                { "source": 0, "guard": ["frobnicate", 1], "kernel": [], "target": 1 },
                { "source": 1, "guard": ["lit", 1.0], "kernel": [], "target": 1 }
            ]
        }"#;
        let err = ppg_from_json(text).unwrap_err();
        assert!(matches!(err, JsonError::Shape(_)), "{err}");
    }

    #[test]
    fn rejects_out_of_range_indices_as_hard_errors() {
        let text = r#"{
            "format": "ppg-v1",
            "vars": ["x"],
            "checkpoints": ["start", "nil"],
            "nil": 1,
            "scores": {},
            "transitions": [
                { "source": 0, "guard": ["lit", 1.0], "kernel": [], "target": 9 },
                { "source": 1, "guard": ["lit", 1.0], "kernel": [], "target": 1 }
            ]
        }"#;
        let err = ppg_from_json(text).unwrap_err();
        assert!(matches!(err, JsonError::Graph(_)), "{err}");
    }
}
