//! The vectorized bootstrap particle filter.
//!
//! One step advances every particle by exactly one transition: resample
//! ancestors by weight, dispatch each row to the unique transition whose
//! guard fires at its checkpoint, run that transition's kernel on the row,
//! move to the transition's target, then score the new position. Repeating
//! from [`vpf_init`] for `t − 1` steps yields the time-`t` population; its
//! weights are always the freshly computed scores of the current positions.
//!
//! Randomness discipline: every random decision draws from a substream of
//! the run's root stream addressed by (step, lane, particle). No draw order
//! is shared between particles, so the scalar reference runner and the
//! row-partitioned threaded runner produce bit-identical ensembles.

use crate::ensemble::ParticleEnsemble;
use crate::resample::{resample_normalized, ResamplingScheme};
use crate::rng::{pack_substream, RngStream, LANE_KERNEL, LANE_RESAMPLE};
use crate::weights::normalize_weights;
use ppg_core::{
    eval_expr, kernel_step_in_place, score_at_with, CheckpointId, Expr, Ppg, ScoreStats, Step,
};
use rand::RngCore;
use rayon::prelude::*;
use std::mem;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("particle count must be at least 1")]
    NoParticles,
    #[error("start checkpoint {start} does not exist (graph has {count} checkpoints)")]
    BadStart { start: CheckpointId, count: usize },
    #[error("could not build thread pool: {0}")]
    ThreadPool(String),
}

/// Per-graph facts hoisted out of the step loop.
struct Precomp {
    /// Whether each transition's kernel contains a `Sample` step; pure
    /// kernels skip substream construction entirely.
    needs_rng: Vec<bool>,
    /// True when nil is in canonical shape (one true-guarded identity
    /// self-loop, unit score): absorbed particles can then short-circuit
    /// dispatch. Observationally identical to full dispatch.
    nil_absorbs: bool,
}

impl Precomp {
    fn new(g: &Ppg) -> Self {
        let needs_rng = g
            .transitions()
            .iter()
            .map(|t| t.kernel.steps.iter().any(|s| matches!(s, Step::Sample { .. })))
            .collect();
        let outgoing = g.transitions_from(g.nil());
        let nil_absorbs = g.score(g.nil()).is_one()
            && outgoing.len() == 1
            && {
                let t = &g.transitions()[outgoing[0]];
                t.target == g.nil() && t.kernel.is_identity() && t.guard == Expr::truth()
            };
        Precomp {
            needs_rng,
            nil_absorbs,
        }
    }
}

#[derive(Default)]
struct Scratch {
    v: Vec<f64>,
    z: Vec<u32>,
}

/// Rng that a pure kernel must never touch.
struct UnusedRng;

impl RngCore for UnusedRng {
    fn next_u32(&mut self) -> u32 {
        unreachable!("kernel without Sample steps drew randomness")
    }
    fn next_u64(&mut self) -> u64 {
        unreachable!("kernel without Sample steps drew randomness")
    }
    fn fill_bytes(&mut self, _dest: &mut [u8]) {
        unreachable!("kernel without Sample steps drew randomness")
    }
    fn try_fill_bytes(&mut self, _dest: &mut [u8]) -> Result<(), rand::Error> {
        unreachable!("kernel without Sample steps drew randomness")
    }
}

/// Move one particle across its active transition and rescore it.
///
/// Guard dispatch picks the first transition whose guard evaluates to 1 at
/// the particle's row; by the partition discipline exactly one does (checked
/// here when debug assertions are on). If none fires — possible only on
/// graphs that failed validation — the particle stays in place and is
/// rescored where it stands; the step never aborts.
fn advance_particle(
    g: &Ppg,
    pre: &Precomp,
    root: &RngStream,
    step: u64,
    p: usize,
    row: &mut [f64],
    z: &mut u32,
    w: &mut f64,
    stats: &mut ScoreStats,
) {
    if pre.nil_absorbs && *z == g.nil() {
        *w = 1.0;
        return;
    }
    let mut chosen = None;
    let mut fired = 0u32;
    for &ti in g.transitions_from(*z) {
        if eval_expr(&g.transitions()[ti].guard, row) == 1.0 {
            fired += 1;
            if chosen.is_none() {
                chosen = Some(ti);
            }
        }
    }
    debug_assert!(
        fired == 1,
        "{} guards fired at checkpoint {} (the guards leaving a checkpoint must partition)",
        fired,
        *z
    );
    if let Some(ti) = chosen {
        let tr = &g.transitions()[ti];
        if pre.needs_rng[ti] {
            let mut rng = root.substream(pack_substream(step, LANE_KERNEL, p as u64));
            kernel_step_in_place(&tr.kernel, row, &mut rng);
        } else {
            kernel_step_in_place(&tr.kernel, row, &mut UnusedRng);
        }
        *z = tr.target;
    }
    *w = score_at_with(g, *z, row, stats);
}

/// Advance the whole population by one transition, in place.
fn step_in_place(
    g: &Ppg,
    ens: &mut ParticleEnsemble,
    scheme: ResamplingScheme,
    root: &RngStream,
    pre: &Precomp,
    scratch: &mut Scratch,
    parallel: bool,
) {
    let n = ens.n_particles();
    let stride = ens.stride;
    let norm = normalize_weights(&ens.w)
        .expect("scores keep engine weights finite, nonnegative, nonempty");
    if norm.degenerate {
        ens.diagnostics.degenerate_weight_steps += 1;
    }

    let step = ens.step as u64;
    let mut resample_rng = root.substream(pack_substream(step, LANE_RESAMPLE, 0));
    let ancestors = resample_normalized(scheme, &norm.weights, n, &mut resample_rng);

    // Gather ancestor rows; the old buffers become next step's scratch.
    scratch.v.clear();
    scratch.z.clear();
    scratch.v.reserve(n * stride);
    scratch.z.reserve(n);
    for &a in &ancestors {
        let a = a as usize;
        scratch.v.extend_from_slice(&ens.v[a * stride..(a + 1) * stride]);
        scratch.z.push(ens.z[a]);
    }
    mem::swap(&mut ens.v, &mut scratch.v);
    mem::swap(&mut ens.z, &mut scratch.z);

    let stats = if parallel {
        ens.v
            .par_chunks_mut(stride)
            .zip(ens.z.par_iter_mut())
            .zip(ens.w.par_iter_mut())
            .enumerate()
            .fold(ScoreStats::default, |mut acc, (p, ((row, z), w))| {
                advance_particle(g, pre, root, step, p, row, z, w, &mut acc);
                acc
            })
            .reduce(ScoreStats::default, |mut a, b| {
                a.merge(b);
                a
            })
    } else {
        let mut acc = ScoreStats::default();
        for (p, ((row, z), w)) in ens
            .v
            .chunks_mut(stride)
            .zip(ens.z.iter_mut())
            .zip(ens.w.iter_mut())
            .enumerate()
        {
            advance_particle(g, pre, root, step, p, row, z, w, &mut acc);
        }
        acc
    };
    ens.diagnostics.score_clamps.merge(stats);
    ens.step += 1;
}

/// Build the time-1 population: `n` copies of the all-zero store at `s0`,
/// each weighted by the score of that position.
///
/// Initialization is deterministic; the stream parameter is reserved so the
/// call shape matches the stepper's.
///
/// Panics if `n` is zero or `s0` is not a checkpoint of `g`; use
/// [`vpf_run`] for validated entry.
pub fn vpf_init(g: &Ppg, s0: CheckpointId, n: usize, _root: &RngStream) -> ParticleEnsemble {
    assert!(n >= 1, "particle count must be at least 1");
    assert!(n <= u32::MAX as usize, "particle count must fit in u32");
    assert!(
        (s0 as usize) < g.checkpoint_count(),
        "start checkpoint {} does not exist",
        s0
    );
    let zero_row = vec![0.0; g.var_count()];
    let mut stats = ScoreStats::default();
    let w0 = score_at_with(g, s0, &zero_row, &mut stats);
    let mut ens = ParticleEnsemble::new_zeroed(n, g.var_count(), s0, w0);
    ens.diagnostics.score_clamps = stats;
    ens
}

/// One resample–dispatch–score step over a borrowed ensemble. `root` must
/// be the run's root stream; the step draws only from its substreams.
pub fn vpf_step(
    g: &Ppg,
    ensemble: &ParticleEnsemble,
    scheme: ResamplingScheme,
    root: &RngStream,
) -> ParticleEnsemble {
    let mut next = ensemble.clone();
    let pre = Precomp::new(g);
    let mut scratch = Scratch::default();
    step_in_place(g, &mut next, scheme, root, &pre, &mut scratch, false);
    next
}

fn check_args(g: &Ppg, s0: CheckpointId, t: usize, n: usize) -> Result<(), EngineError> {
    if t == 0 {
        return Err(EngineError::ZeroHorizon);
    }
    if n == 0 || n > u32::MAX as usize {
        return Err(EngineError::NoParticles);
    }
    if (s0 as usize) >= g.checkpoint_count() {
        return Err(EngineError::BadStart {
            start: s0,
            count: g.checkpoint_count(),
        });
    }
    Ok(())
}

fn run_loop(
    g: &Ppg,
    s0: CheckpointId,
    t: usize,
    n: usize,
    scheme: ResamplingScheme,
    seed: u64,
    parallel: bool,
) -> ParticleEnsemble {
    let root = RngStream::new(seed);
    let mut ens = vpf_init(g, s0, n, &root);
    let pre = Precomp::new(g);
    let mut scratch = Scratch::default();
    for _ in 1..t {
        step_in_place(g, &mut ens, scheme, &root, &pre, &mut scratch, parallel);
    }
    ens
}

/// Run the filter to time `t` (so `t − 1` steps after initialization),
/// strictly sequentially. This is the reference runner: every golden value
/// in the test suite is produced by this code path.
pub fn vpf_run(
    g: &Ppg,
    s0: CheckpointId,
    t: usize,
    n: usize,
    scheme: ResamplingScheme,
    seed: u64,
) -> Result<ParticleEnsemble, EngineError> {
    check_args(g, s0, t, n)?;
    Ok(run_loop(g, s0, t, n, scheme, seed, false))
}

/// [`vpf_run`] with the dispatch/kernel/score sweep partitioned across
/// `threads` worker threads by particle row. Weight normalization,
/// resampling and the ancestor gather stay sequential, and kernels draw
/// from per-particle substreams, so the result is bit-identical to the
/// sequential runner for every thread count. `threads == 0` selects the
/// sequential runner itself.
pub fn vpf_run_threaded(
    g: &Ppg,
    s0: CheckpointId,
    t: usize,
    n: usize,
    scheme: ResamplingScheme,
    seed: u64,
    threads: usize,
) -> Result<ParticleEnsemble, EngineError> {
    check_args(g, s0, t, n)?;
    if threads == 0 {
        return Ok(run_loop(g, s0, t, n, scheme, seed, false));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| EngineError::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| run_loop(g, s0, t, n, scheme, seed, true)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ppg_core::{DistributionSpec, KernelAction, ScoreSpec, Transition};

    /// The two-coin branching program: flip c; if c = 0 stop, otherwise
    /// flip d and condition on d = 1. Checkpoints: 0 start, 1 branch,
    /// 2 nil, 3 scored.
    fn two_coin() -> Ppg {
        let flip = |target: usize| KernelAction {
            steps: vec![Step::Sample {
                target,
                dist: DistributionSpec::Bernoulli { p: Expr::lit(0.5) },
            }],
        };
        Ppg::new(
            vec!["c".into(), "d".into()],
            vec!["start".into(), "branch".into(), "nil".into(), "obs".into()],
            vec![
                Transition {
                    source: 0,
                    guard: Expr::truth(),
                    kernel: flip(0),
                    target: 1,
                },
                Transition {
                    source: 1,
                    guard: Expr::var(0).eq(Expr::lit(0.0)),
                    kernel: KernelAction::identity(),
                    target: 2,
                },
                Transition {
                    source: 1,
                    guard: Expr::var(0).eq(Expr::lit(0.0)).not(),
                    kernel: flip(1),
                    target: 3,
                },
                Transition {
                    source: 3,
                    guard: Expr::truth(),
                    kernel: KernelAction::identity(),
                    target: 2,
                },
                Transition {
                    source: 2,
                    guard: Expr::truth(),
                    kernel: KernelAction::identity(),
                    target: 2,
                },
            ],
            2,
            vec![(3, ScoreSpec::Pred(Expr::var(1).eq(Expr::lit(1.0))))],
        )
        .unwrap()
    }

    /// Three-step Gaussian walk with a smooth positional score, for
    /// exercising continuous kernels and fractional weights.
    fn gaussian_walk() -> Ppg {
        let kernel = KernelAction {
            steps: vec![
                Step::Sample {
                    target: 0,
                    dist: DistributionSpec::Normal {
                        mean: Expr::var(0),
                        sd: Expr::lit(1.0),
                    },
                },
                Step::Assign {
                    target: 1,
                    value: Expr::var(1).add(Expr::lit(1.0)),
                },
            ],
        };
        let in_loop = Expr::var(1).lt(Expr::lit(3.0));
        Ppg::new(
            vec!["x".into(), "t".into()],
            vec!["loop".into(), "nil".into()],
            vec![
                Transition {
                    source: 0,
                    guard: in_loop.clone(),
                    kernel,
                    target: 0,
                },
                Transition {
                    source: 0,
                    guard: in_loop.not(),
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
            // |x| / (|x| + 1): a smooth weight in [0, 1).
            vec![(
                0,
                ScoreSpec::Clamped(
                    Expr::var(0)
                        .abs()
                        .div(Expr::var(0).abs().add(Expr::lit(1.0))),
                ),
            )],
        )
        .unwrap()
    }

    #[test]
    fn init_matches_contract() {
        let g = two_coin();
        let root = RngStream::new(7);
        let ens = vpf_init(&g, 0, 4, &root);
        assert_eq!(ens.step(), 1);
        assert_eq!(ens.checkpoints(), &[0, 0, 0, 0]);
        assert_eq!(ens.weights(), &[1.0, 1.0, 1.0, 1.0]);
        for i in 0..4 {
            assert_eq!(ens.row(i), &[0.0, 0.0]);
        }
    }

    #[test]
    fn init_scores_the_start_checkpoint() {
        // Move the score to the start: the zero store fails [c = 1], so
        // the whole initial ensemble is weighted zero.
        let mut g = two_coin();
        g = Ppg::new(
            g.var_names().to_vec(),
            g.checkpoint_names().to_vec(),
            g.transitions().to_vec(),
            g.nil(),
            vec![(0, ScoreSpec::Pred(Expr::var(0).eq(Expr::lit(1.0))))],
        )
        .unwrap();
        let root = RngStream::new(7);
        let ens = vpf_init(&g, 0, 3, &root);
        assert_eq!(ens.weights(), &[0.0, 0.0, 0.0]);
        // The next step survives on the uniform fallback and records it.
        let next = vpf_step(&g, &ens, ResamplingScheme::Systematic, &root);
        assert_eq!(next.diagnostics().degenerate_weight_steps, 1);
        assert_eq!(next.step(), 2);
    }

    #[test]
    fn two_coin_population_fractions() {
        let g = two_coin();
        let n = 100_000;
        let ens = vpf_run(&g, 0, 4, n, ResamplingScheme::Systematic, 20_240).unwrap();
        // By time 4 every surviving particle has terminated with weight 1.
        assert!(ens.checkpoints().iter().all(|&z| z == 2));
        assert!(ens.weights().iter().all(|&w| w == 1.0));
        // Survivors split 2/3 on (c,d) = (0,0) and 1/3 on (1,1): the
        // conditioned-branch mass among terminated weight.
        let both = |ens: &ParticleEnsemble, c: f64, d: f64| {
            ens.particles()
                .filter(|(row, _, _)| row[0] == c && row[1] == d)
                .count() as f64
                / n as f64
        };
        assert!((both(&ens, 0.0, 0.0) - 2.0 / 3.0).abs() < 0.01);
        assert!((both(&ens, 1.0, 1.0) - 1.0 / 3.0).abs() < 0.01);
        assert_eq!(both(&ens, 1.0, 0.0), 0.0);
    }

    #[test]
    fn absorbed_particles_stay_frozen() {
        let g = two_coin();
        let at4 = vpf_run(&g, 0, 4, 2_000, ResamplingScheme::Systematic, 9).unwrap();
        let at9 = vpf_run(&g, 0, 9, 2_000, ResamplingScheme::Systematic, 9).unwrap();
        assert!(at9.checkpoints().iter().all(|&z| z == 2));
        assert!(at9.weights().iter().all(|&w| w == 1.0));
        // Termination freezes the store distribution: the same atoms, and
        // (under systematic resampling of equal weights) the same counts.
        let count = |ens: &ParticleEnsemble, c: f64| {
            ens.particles().filter(|(row, _, _)| row[0] == c).count()
        };
        assert_eq!(count(&at4, 0.0), count(&at9, 0.0));
        assert_eq!(count(&at4, 1.0), count(&at9, 1.0));
    }

    #[test]
    fn stepping_matches_run() {
        let g = two_coin();
        let seed = 1_234;
        let root = RngStream::new(seed);
        let mut ens = vpf_init(&g, 0, 500, &root);
        for _ in 1..4 {
            ens = vpf_step(&g, &ens, ResamplingScheme::Systematic, &root);
        }
        let run = vpf_run(&g, 0, 4, 500, ResamplingScheme::Systematic, seed).unwrap();
        assert_eq!(ens, run);
    }

    #[test]
    fn deterministic_given_seed() {
        let g = gaussian_walk();
        let a = vpf_run(&g, 0, 5, 300, ResamplingScheme::Multinomial, 42).unwrap();
        let b = vpf_run(&g, 0, 5, 300, ResamplingScheme::Multinomial, 42).unwrap();
        let c = vpf_run(&g, 0, 5, 300, ResamplingScheme::Multinomial, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn threaded_is_bit_identical_to_sequential() {
        let g = gaussian_walk();
        let seq = vpf_run(&g, 0, 5, 777, ResamplingScheme::Systematic, 11).unwrap();
        for threads in [1, 2, 3] {
            let par =
                vpf_run_threaded(&g, 0, 5, 777, ResamplingScheme::Systematic, 11, threads)
                    .unwrap();
            assert_eq!(seq, par, "thread count {threads} changed the result");
        }
    }

    #[test]
    fn run_validates_arguments() {
        let g = two_coin();
        assert!(matches!(
            vpf_run(&g, 0, 0, 10, ResamplingScheme::Systematic, 1),
            Err(EngineError::ZeroHorizon)
        ));
        assert!(matches!(
            vpf_run(&g, 0, 3, 0, ResamplingScheme::Systematic, 1),
            Err(EngineError::NoParticles)
        ));
        assert!(matches!(
            vpf_run(&g, 9, 3, 10, ResamplingScheme::Systematic, 1),
            Err(EngineError::BadStart { start: 9, count: 4 })
        ));
        // t = 1 is just initialization.
        let ens = vpf_run(&g, 0, 1, 10, ResamplingScheme::Systematic, 1).unwrap();
        assert_eq!(ens.step(), 1);
        assert_eq!(ens.checkpoints(), vec![0; 10].as_slice());
    }

    #[test]
    fn single_particle_runs() {
        let g = two_coin();
        let ens = vpf_run(&g, 0, 4, 1, ResamplingScheme::Systematic, 5).unwrap();
        assert_eq!(ens.n_particles(), 1);
        assert_eq!(ens.checkpoints(), &[2]);
    }

    #[test]
    fn continuous_walk_reaches_nil_with_unit_weights() {
        let g = gaussian_walk();
        let ens = vpf_run(&g, 0, 6, 2_000, ResamplingScheme::Systematic, 3).unwrap();
        // Guard [t < 3] closes after three loop turns: time 1 (init) + 3
        // turns + 1 exit transition = time 5; time 6 is absorbed.
        assert!(ens.checkpoints().iter().all(|&z| z == 1));
        assert!(ens.weights().iter().all(|&w| w == 1.0));
        for (row, _, _) in ens.particles() {
            assert_eq!(row[1], 3.0);
            assert!(row[0].is_finite());
        }
    }
}
