//! Scalar (one-particle-at-a-time) reference filter.
//!
//! A deliberately plain array-of-structs implementation of the same
//! algorithm as the vectorized runner: each particle owns its row, each
//! step loops over particles one by one. Because both runners address
//! randomness through the same (step, lane, particle) substreams, their
//! final ensembles must be bit-identical — the regression test that keeps
//! the vectorized layout honest.

use crate::ensemble::{EngineDiagnostics, ParticleEnsemble};
use crate::resample::{resample_normalized, ResamplingScheme};
use crate::rng::{pack_substream, RngStream, LANE_KERNEL, LANE_RESAMPLE};
use crate::vpf::EngineError;
use crate::weights::normalize_weights;
use ppg_core::{eval_expr, kernel_step_in_place, score_at_with, CheckpointId, Ppg};

struct ScalarParticle {
    row: Vec<f64>,
    checkpoint: u32,
    weight: f64,
}

/// Run the scalar filter to time `t`. Same contract as the vectorized
/// runner, including the result: `scalar_pf_run(...) == vpf_run(...)`
/// holds exactly, field for field.
pub fn scalar_pf_run(
    g: &Ppg,
    s0: CheckpointId,
    t: usize,
    n: usize,
    scheme: ResamplingScheme,
    seed: u64,
) -> Result<ParticleEnsemble, EngineError> {
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

    let root = RngStream::new(seed);
    let mut diagnostics = EngineDiagnostics::default();

    let w0 = score_at_with(g, s0, &vec![0.0; g.var_count()], &mut diagnostics.score_clamps);
    let mut particles: Vec<ScalarParticle> = (0..n)
        .map(|_| ScalarParticle {
            row: vec![0.0; g.var_count()],
            checkpoint: s0,
            weight: w0,
        })
        .collect();

    for step in 1..t as u64 {
        // Resample ancestors by weight.
        let weights: Vec<f64> = particles.iter().map(|p| p.weight).collect();
        let norm = normalize_weights(&weights)
            .expect("scores keep weights finite, nonnegative, nonempty");
        if norm.degenerate {
            diagnostics.degenerate_weight_steps += 1;
        }
        let mut resample_rng = root.substream(pack_substream(step, LANE_RESAMPLE, 0));
        let ancestors = resample_normalized(scheme, &norm.weights, n, &mut resample_rng);
        let mut next: Vec<ScalarParticle> = ancestors
            .iter()
            .map(|&a| {
                let src = &particles[a as usize];
                ScalarParticle {
                    row: src.row.clone(),
                    checkpoint: src.checkpoint,
                    weight: src.weight,
                }
            })
            .collect();

        // Advance each particle across its unique active transition.
        for (p, particle) in next.iter_mut().enumerate() {
            let mut chosen = None;
            for &ti in g.transitions_from(particle.checkpoint) {
                if eval_expr(&g.transitions()[ti].guard, &particle.row) == 1.0 {
                    chosen = Some(ti);
                    break;
                }
            }
            if let Some(ti) = chosen {
                let tr = &g.transitions()[ti];
                let mut rng = root.substream(pack_substream(step, LANE_KERNEL, p as u64));
                kernel_step_in_place(&tr.kernel, &mut particle.row, &mut rng);
                particle.checkpoint = tr.target;
            }
            particle.weight =
                score_at_with(g, particle.checkpoint, &particle.row, &mut diagnostics.score_clamps);
        }
        particles = next;
    }

    // Repack into the columnar ensemble for comparison and reporting.
    let mut ens = ParticleEnsemble::new_zeroed(n, g.var_count(), s0, 0.0);
    for (i, p) in particles.iter().enumerate() {
        let base = i * ens.stride;
        ens.v[base..base + g.var_count()].copy_from_slice(&p.row);
        ens.z[i] = p.checkpoint;
        ens.w[i] = p.weight;
    }
    ens.step = t;
    ens.diagnostics = diagnostics;
    Ok(ens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vpf::vpf_run;
    use ppg_core::{DistributionSpec, Expr, KernelAction, ScoreSpec, Step, Transition};

    /// Mixed discrete/continuous graph: branch on a coin, walk a Gaussian,
    /// weight smoothly. Exercises every dispatch and scoring path.
    fn mixed_graph() -> Ppg {
        let draw = KernelAction {
            steps: vec![
                Step::Sample {
                    target: 0,
                    dist: DistributionSpec::Bernoulli { p: Expr::lit(0.3) },
                },
                Step::Sample {
                    target: 1,
                    dist: DistributionSpec::Normal {
                        mean: Expr::var(1),
                        sd: Expr::lit(0.5),
                    },
                },
                Step::Assign {
                    target: 2,
                    value: Expr::var(2).add(Expr::lit(1.0)),
                },
            ],
        };
        let looping = Expr::var(2).lt(Expr::lit(4.0));
        Ppg::new(
            vec!["c".into(), "x".into(), "k".into()],
            vec!["loop".into(), "nil".into()],
            vec![
                Transition {
                    source: 0,
                    guard: looping.clone(),
                    kernel: draw,
                    target: 0,
                },
                Transition {
                    source: 0,
                    guard: looping.not(),
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
            vec![(
                0,
                ScoreSpec::Clamped(
                    Expr::lit(1.0).div(Expr::var(1).abs().add(Expr::lit(1.0))),
                ),
            )],
        )
        .unwrap()
    }

    #[test]
    fn scalar_matches_vectorized_bit_for_bit() {
        let g = mixed_graph();
        for scheme in [ResamplingScheme::Systematic, ResamplingScheme::Multinomial] {
            for seed in [0, 1, 99_991] {
                let scalar = scalar_pf_run(&g, 0, 7, 400, scheme, seed).unwrap();
                let vector = vpf_run(&g, 0, 7, 400, scheme, seed).unwrap();
                assert_eq!(scalar, vector, "scheme {scheme:?}, seed {seed}");
            }
        }
    }

    #[test]
    fn scalar_validates_arguments() {
        let g = mixed_graph();
        assert!(matches!(
            scalar_pf_run(&g, 0, 0, 10, ResamplingScheme::Systematic, 1),
            Err(EngineError::ZeroHorizon)
        ));
        assert!(matches!(
            scalar_pf_run(&g, 4, 2, 10, ResamplingScheme::Systematic, 1),
            Err(EngineError::BadStart { .. })
        ));
    }
}
