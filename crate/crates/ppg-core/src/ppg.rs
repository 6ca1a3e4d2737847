//! The probabilistic program graph itself.
//!
//! A graph is a finite set of checkpoints, guarded kernel transitions
//! between them, a distinguished absorbing `nil` checkpoint marking
//! termination, and a score per checkpoint. The guards leaving a checkpoint
//! must partition: on every store exactly one of them holds, so a particle's
//! next transition is always determined. `nil` carries exactly one
//! transition — the identity self-loop guarded by `true` — and the neutral
//! score, which is what makes it absorbing: once a trajectory reaches `nil`
//! its store and weight are frozen.
//!
//! Construction performs the *structural* (hard-error) checks: every index
//! in range, `nil` valid, expressions only mentioning declared variables.
//! The semantic checks that need evaluation — guard partition, score range,
//! the `nil` self-loop shape — live in [`crate::validate_ppg`], which
//! reports violations instead of erroring.

use crate::expr::Expr;
use crate::kernel::KernelAction;
use crate::score::{eval_score, ScoreSpec, ScoreStats};
use crate::store::Store;
use thiserror::Error;

pub type CheckpointId = u32;

/// A guarded transition: from `source`, on stores where `guard` is 1, run
/// `kernel` and move to `target`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub source: CheckpointId,
    pub guard: Expr,
    pub kernel: KernelAction,
    pub target: CheckpointId,
}

/// A store paired with the checkpoint the trajectory currently occupies.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleState {
    pub store: Store,
    pub checkpoint: CheckpointId,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PpgError {
    #[error("graph needs at least one checkpoint")]
    NoCheckpoints,
    #[error("nil index {nil} out of range (checkpoint count {count})")]
    NilOutOfRange { nil: CheckpointId, count: usize },
    #[error("transition {index}: {end} checkpoint {id} out of range")]
    BadEndpoint {
        index: usize,
        end: &'static str,
        id: CheckpointId,
    },
    #[error("transition {index}: {part} mentions variable {var}, but the graph has {vars} variables")]
    BadVariable {
        index: usize,
        part: &'static str,
        var: usize,
        vars: usize,
    },
    #[error("score for checkpoint {checkpoint} mentions variable {var}, but the graph has {vars} variables")]
    BadScoreVariable {
        checkpoint: CheckpointId,
        var: usize,
        vars: usize,
    },
    #[error("score keyed to checkpoint {checkpoint}, which does not exist")]
    BadScoreKey { checkpoint: CheckpointId },
    #[error("checkpoint name count {names} does not match checkpoint count {count}")]
    NameCount { names: usize, count: usize },
}

/// A validated-at-construction program graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Ppg {
    var_names: Vec<String>,
    checkpoint_names: Vec<String>,
    transitions: Vec<Transition>,
    nil: CheckpointId,
    /// Dense per-checkpoint scores; checkpoints without an explicit entry
    /// get `One`.
    scores: Vec<ScoreSpec>,
    /// Indices into `transitions`, grouped by source, in declaration order.
    by_source: Vec<Vec<usize>>,
}

impl Ppg {
    /// Build a graph, hard-erroring on malformed indices.
    pub fn new(
        var_names: Vec<String>,
        checkpoint_names: Vec<String>,
        transitions: Vec<Transition>,
        nil: CheckpointId,
        scores: Vec<(CheckpointId, ScoreSpec)>,
    ) -> Result<Self, PpgError> {
        let count = checkpoint_names.len();
        if count == 0 {
            return Err(PpgError::NoCheckpoints);
        }
        if nil as usize >= count {
            return Err(PpgError::NilOutOfRange { nil, count });
        }
        let vars = var_names.len();

        for (index, t) in transitions.iter().enumerate() {
            if t.source as usize >= count {
                return Err(PpgError::BadEndpoint {
                    index,
                    end: "source",
                    id: t.source,
                });
            }
            if t.target as usize >= count {
                return Err(PpgError::BadEndpoint {
                    index,
                    end: "target",
                    id: t.target,
                });
            }
            if let Some(var) = t.guard.max_var().filter(|&m| m >= vars) {
                return Err(PpgError::BadVariable {
                    index,
                    part: "guard",
                    var,
                    vars,
                });
            }
            if let Some(var) = t.kernel.max_var().filter(|&m| m >= vars) {
                return Err(PpgError::BadVariable {
                    index,
                    part: "kernel",
                    var,
                    vars,
                });
            }
        }

        let mut dense = vec![ScoreSpec::One; count];
        for (checkpoint, spec) in scores {
            if checkpoint as usize >= count {
                return Err(PpgError::BadScoreKey { checkpoint });
            }
            if let Some(var) = spec.max_var().filter(|&m| m >= vars) {
                return Err(PpgError::BadScoreVariable {
                    checkpoint,
                    var,
                    vars,
                });
            }
            dense[checkpoint as usize] = spec;
        }

        let mut by_source = vec![Vec::new(); count];
        for (i, t) in transitions.iter().enumerate() {
            by_source[t.source as usize].push(i);
        }

        Ok(Ppg {
            var_names,
            checkpoint_names,
            transitions,
            nil,
            scores: dense,
            by_source,
        })
    }

    pub fn var_count(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn checkpoint_count(&self) -> usize {
        self.checkpoint_names.len()
    }

    pub fn checkpoint_names(&self) -> &[String] {
        &self.checkpoint_names
    }

    pub fn nil(&self) -> CheckpointId {
        self.nil
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Indices of the transitions leaving `source`, in declaration order.
    pub fn transitions_from(&self, source: CheckpointId) -> &[usize] {
        &self.by_source[source as usize]
    }

    pub fn score(&self, checkpoint: CheckpointId) -> &ScoreSpec {
        &self.scores[checkpoint as usize]
    }

    pub fn scores(&self) -> &[ScoreSpec] {
        &self.scores
    }

    /// Non-One score entries, sparse form (used by serialization).
    pub fn score_entries(&self) -> impl Iterator<Item = (CheckpointId, &ScoreSpec)> {
        self.scores
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_one())
            .map(|(i, s)| (i as CheckpointId, s))
    }
}

/// The score of checkpoint `s` evaluated on store `v`, always in [0, 1].
/// `nil` (neutral score) yields 1. Clamp events are recorded in `stats`.
pub fn score_at_with(g: &Ppg, s: CheckpointId, v: &[f64], stats: &mut ScoreStats) -> f64 {
    eval_score(g.score(s), v, stats)
}

/// [`score_at_with`] without diagnostics collection.
pub fn score_at(g: &Ppg, s: CheckpointId, v: &[f64]) -> f64 {
    let mut stats = ScoreStats::default();
    score_at_with(g, s, v, &mut stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn two_node() -> Ppg {
        // start --true,id--> nil, plus the nil self-loop.
        Ppg::new(
            vec!["x".into()],
            vec!["start".into(), "nil".into()],
            vec![
                Transition {
                    source: 0,
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
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn indexes_by_source() {
        let g = two_node();
        assert_eq!(g.transitions_from(0), &[0]);
        assert_eq!(g.transitions_from(1), &[1]);
    }

    #[test]
    fn score_defaults_to_one() {
        let g = two_node();
        assert_eq!(score_at(&g, 0, &[123.0]), 1.0);
        assert_eq!(score_at(&g, 1, &[123.0]), 1.0);
    }

    #[test]
    fn rejects_bad_indices() {
        let bad = Ppg::new(
            vec!["x".into()],
            vec!["start".into(), "nil".into()],
            vec![Transition {
                source: 0,
                guard: Expr::var(3).gt(Expr::lit(0.0)),
                kernel: KernelAction::identity(),
                target: 1,
            }],
            1,
            vec![],
        );
        assert!(matches!(bad, Err(PpgError::BadVariable { var: 3, .. })));

        let bad = Ppg::new(
            vec![],
            vec!["start".into()],
            vec![],
            4,
            vec![],
        );
        assert!(matches!(bad, Err(PpgError::NilOutOfRange { .. })));
    }
}
