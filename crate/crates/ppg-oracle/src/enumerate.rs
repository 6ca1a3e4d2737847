//! Exhaustive path enumeration for finite, discrete graphs.
//!
//! Walks the graph depth by depth, carrying for every reachable
//! (store, checkpoint) pair two exact aggregates over all paths that end
//! there: total probability `p` and weight-carrying mass `p·w` (`w` the
//! product of scores along the path). Both evolve linearly, which is what
//! makes merging paths at shared states sound — and what keeps balanced
//! models (coin walks and the like) polynomial instead of exponential.

use crate::value::{eval_q, QVal};
use crate::OracleError;
use num::{BigRational, One, Signed, Zero};
use ppg_core::{CheckpointId, DistributionSpec, KernelAction, Ppg, ScoreSpec, Step};
use std::collections::HashMap;
use std::io::{self, Write};

/// One aggregated final state.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactRow {
    pub store: Vec<QVal>,
    pub checkpoint: CheckpointId,
    /// Total probability of all paths ending in this state.
    pub probability: BigRational,
    /// Probability-weighted average path weight (exact): Σp·w / Σp.
    pub weight: BigRational,
}

/// The exact time-t distribution over final states, with path weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactTable {
    pub rows: Vec<ExactRow>,
    pub horizon: usize,
    nil: CheckpointId,
}

impl ExactTable {
    pub fn nil(&self) -> CheckpointId {
        self.nil
    }

    /// Dump rows as CSV with exact rational fields.
    pub fn to_csv<Out: Write>(&self, var_names: &[String], mut out: Out) -> io::Result<()> {
        let mut header: Vec<String> = var_names.to_vec();
        header.push("checkpoint".into());
        header.push("probability".into());
        header.push("weight".into());
        writeln!(out, "{}", header.join(","))?;
        for row in &self.rows {
            let mut fields: Vec<String> = row.store.iter().map(|v| v.to_string()).collect();
            fields.push(row.checkpoint.to_string());
            fields.push(row.probability.to_string());
            fields.push(row.weight.to_string());
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// Finite support of a distribution given a store: (value, probability)
/// pairs. Mirrors the sampler's domain checks — invalid parameters degrade
/// to a point mass at zero, exactly like the engine.
fn dist_support(
    d: &DistributionSpec,
    v: &[QVal],
) -> Result<Vec<(QVal, BigRational)>, OracleError> {
    let point = |value: QVal| vec![(value, BigRational::one())];
    match d {
        DistributionSpec::Bernoulli { p } => {
            let p = eval_q(p, v)?;
            match p {
                QVal::Q(p) if !p.is_negative() && p <= BigRational::one() => {
                    let mut support = Vec::with_capacity(2);
                    if !p.is_zero() {
                        support.push((QVal::one(), p.clone()));
                    }
                    let q = BigRational::one() - p;
                    if !q.is_zero() {
                        support.push((QVal::zero(), q));
                    }
                    Ok(support)
                }
                _ => Ok(point(QVal::zero())),
            }
        }
        DistributionSpec::DiscreteUniform { items } => {
            if items.is_empty() {
                return Ok(point(QVal::zero()));
            }
            let each = BigRational::new(1.into(), (items.len() as i64).into());
            items
                .iter()
                .map(|e| Ok((eval_q(e, v)?, each.clone())))
                .collect()
        }
        DistributionSpec::Dirac { value } => Ok(point(eval_q(value, v)?)),
        DistributionSpec::Uniform { .. }
        | DistributionSpec::Normal { .. }
        | DistributionSpec::TruncNormal { .. } => Err(OracleError::NotEnumerable(format!(
            "continuous distribution {d} has no finite support"
        ))),
    }
}

/// Probability mass of `x` under a discrete distribution, exactly
/// (mirrors the float `density` for the enumerable families).
fn mass_q(d: &DistributionSpec, v: &[QVal], x: &QVal) -> Result<BigRational, OracleError> {
    let mut total = BigRational::zero();
    for (value, p) in dist_support(d, v)? {
        if &value == x {
            total += p;
        }
    }
    Ok(total)
}

fn clamp01(raw: QVal) -> BigRational {
    match raw {
        QVal::NegInf => BigRational::zero(),
        QVal::PosInf => BigRational::one(),
        QVal::Q(q) => {
            if q.is_negative() {
                BigRational::zero()
            } else if q > BigRational::one() {
                BigRational::one()
            } else {
                q
            }
        }
    }
}

/// Exact score of a checkpoint on a store; mirrors the float scorer.
fn score_q(g: &Ppg, s: CheckpointId, v: &[QVal]) -> Result<BigRational, OracleError> {
    eval_spec_q(g.score(s), v)
}

fn eval_spec_q(spec: &ScoreSpec, v: &[QVal]) -> Result<BigRational, OracleError> {
    match spec {
        ScoreSpec::One => Ok(BigRational::one()),
        ScoreSpec::Pred(e) | ScoreSpec::Clamped(e) => Ok(clamp01(eval_q(e, v)?)),
        ScoreSpec::DensityRatio {
            dist,
            at,
            normalizer,
        } => {
            let point = eval_q(at, v)?;
            let d = QVal::Q(mass_q(dist, v, &point)?);
            let n = eval_q(normalizer, v)?;
            Ok(clamp01(crate::value::qdiv(&d, &n)))
        }
        ScoreSpec::Product(parts) => {
            let mut acc = BigRational::one();
            for part in parts {
                acc *= eval_spec_q(part, v)?;
                if acc.is_zero() {
                    break;
                }
            }
            Ok(acc)
        }
    }
}

/// All stores a kernel can produce from `store`, with exact probabilities.
fn kernel_branches(
    k: &KernelAction,
    store: &[QVal],
) -> Result<Vec<(Vec<QVal>, BigRational)>, OracleError> {
    let mut states = vec![(store.to_vec(), BigRational::one())];
    for step in &k.steps {
        match step {
            Step::Assign { target, value } => {
                for (s, _) in &mut states {
                    s[*target] = eval_q(value, s)?;
                }
            }
            Step::Sample { target, dist } => {
                let mut next = Vec::new();
                for (s, p) in &states {
                    for (value, q) in dist_support(dist, s)? {
                        let mut ns = s.clone();
                        ns[*target] = value;
                        next.push((ns, p * q));
                    }
                }
                states = next;
            }
        }
    }
    Ok(states)
}

/// Default cap on distinct states per depth.
const DEFAULT_STATE_LIMIT: usize = 1 << 20;

pub fn enumerate(g: &Ppg, s0: CheckpointId, t: usize) -> Result<ExactTable, OracleError> {
    enumerate_with_limit(g, s0, t, DEFAULT_STATE_LIMIT)
}

/// Enumerate all length-t trajectories, aggregated per final state.
pub fn enumerate_with_limit(
    g: &Ppg,
    s0: CheckpointId,
    t: usize,
    max_states: usize,
) -> Result<ExactTable, OracleError> {
    if t == 0 {
        return Err(OracleError::ZeroHorizon);
    }
    if (s0 as usize) >= g.checkpoint_count() {
        return Err(OracleError::BadStart {
            start: s0,
            count: g.checkpoint_count(),
        });
    }

    type Frontier = HashMap<(Vec<QVal>, CheckpointId), (BigRational, BigRational)>;

    let zero_store = vec![QVal::zero(); g.var_count()];
    let w0 = score_q(g, s0, &zero_store)?;
    let mut frontier: Frontier = HashMap::new();
    frontier.insert((zero_store, s0), (BigRational::one(), w0));

    for depth in 1..t {
        let mut next: Frontier = HashMap::with_capacity(frontier.len());
        for ((store, z), (p, pw)) in frontier {
            // The unique transition whose guard holds; mirrors the engine's
            // first-match dispatch, including staying put if none fires.
            let mut chosen = None;
            for &ti in g.transitions_from(z) {
                if eval_q(&g.transitions()[ti].guard, &store)? == QVal::one() {
                    chosen = Some(ti);
                    break;
                }
            }
            match chosen {
                Some(ti) => {
                    let tr = &g.transitions()[ti];
                    for (new_store, q) in kernel_branches(&tr.kernel, &store)? {
                        let np = &p * &q;
                        if np.is_zero() {
                            continue;
                        }
                        let w_here = score_q(g, tr.target, &new_store)?;
                        let npw = &pw * &q * &w_here;
                        let entry = next
                            .entry((new_store, tr.target))
                            .or_insert_with(|| (BigRational::zero(), BigRational::zero()));
                        entry.0 += np;
                        entry.1 += npw;
                    }
                }
                None => {
                    let w_here = score_q(g, z, &store)?;
                    let npw = &pw * &w_here;
                    let entry = next
                        .entry((store, z))
                        .or_insert_with(|| (BigRational::zero(), BigRational::zero()));
                    entry.0 += p;
                    entry.1 += npw;
                }
            }
            if next.len() > max_states {
                return Err(OracleError::StateLimit {
                    limit: max_states,
                    depth: depth + 1,
                });
            }
        }
        frontier = next;
    }

    let mut rows: Vec<ExactRow> = frontier
        .into_iter()
        .map(|((store, checkpoint), (p, pw))| {
            let weight = &pw / &p;
            ExactRow {
                store,
                checkpoint,
                probability: p,
                weight,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.checkpoint, &a.store)
            .cmp(&(b.checkpoint, &b.store))
    });
    Ok(ExactTable {
        rows,
        horizon: t,
        nil: g.nil(),
    })
}
