//! Graphviz rendering of a program graph.

use ppg_core::{DistributionSpec, Expr, Ppg, ScoreSpec, Step};
use std::fmt::Write;

/// Render `g` as a Graphviz `digraph`: one node per checkpoint (scored
/// checkpoints show their score, nil is doubled), one edge per
/// transition labelled `guard / kernel`.
pub fn to_dot(g: &Ppg) -> String {
    let names = g.var_names();
    let mut out = String::new();
    out.push_str("digraph ppg {\n  rankdir=LR;\n  node [shape=circle];\n");
    for (id, name) in g.checkpoint_names().iter().enumerate() {
        let mut label = name.clone();
        match g.score(id as u32) {
            ScoreSpec::One => {}
            s => {
                let _ = write!(label, "\\nscore: {}", score_label(s, names));
            }
        }
        let shape = if id as u32 == g.nil() {
            ", shape=doublecircle"
        } else {
            ""
        };
        let _ = writeln!(out, "  c{id} [label=\"{}\"{shape}];", escape(&label));
    }
    for t in g.transitions() {
        let mut label = format!("{}", t.guard.display_with(names));
        if !t.kernel.is_identity() {
            let steps: Vec<String> = t.kernel.steps.iter().map(|s| step_label(s, names)).collect();
            let _ = write!(label, " / {}", steps.join("; "));
        }
        let _ = writeln!(
            out,
            "  c{} -> c{} [label=\"{}\"];",
            t.source,
            t.target,
            escape(&label)
        );
    }
    out.push_str("}\n");
    out
}

fn step_label(s: &Step, names: &[String]) -> String {
    match s {
        Step::Assign { target, value } => {
            format!("{} := {}", names[*target], value.display_with(names))
        }
        Step::Sample { target, dist } => {
            format!("{} ~ {}", names[*target], dist_label(dist, names))
        }
    }
}

fn dist_label(d: &DistributionSpec, names: &[String]) -> String {
    let p = |e: &Expr| format!("{}", e.display_with(names));
    match d {
        DistributionSpec::Bernoulli { p: q } => format!("B({})", p(q)),
        DistributionSpec::Uniform { lo, hi } => format!("U({}, {})", p(lo), p(hi)),
        DistributionSpec::Normal { mean, sd } => format!("N({}, {})", p(mean), p(sd)),
        DistributionSpec::TruncNormal { lo, hi, mean, sd } => {
            format!("N_T({}, {}, {}, {})", p(lo), p(hi), p(mean), p(sd))
        }
        DistributionSpec::DiscreteUniform { items } => {
            let body: Vec<String> = items.iter().map(p).collect();
            format!("DU({})", body.join(", "))
        }
        DistributionSpec::Dirac { value } => format!("Dirac({})", p(value)),
    }
}

fn score_label(s: &ScoreSpec, names: &[String]) -> String {
    match s {
        ScoreSpec::One => "1".into(),
        ScoreSpec::Pred(e) => format!("[{}]", e.display_with(names)),
        ScoreSpec::Clamped(e) => format!("clamp01({})", e.display_with(names)),
        ScoreSpec::DensityRatio { dist, at, .. } => format!(
            "pdf({}, {}) / max pdf",
            dist_label(dist, names),
            at.display_with(names)
        ),
        ScoreSpec::Product(parts) => {
            let body: Vec<String> = parts.iter().map(|p| score_label(p, names)).collect();
            body.join(" * ")
        }
    }
}

fn escape(s: &str) -> String {
    // `\n` sequences in labels are Graphviz line breaks; keep them.
    s.replace('"', "\\\"")
}
