//! Run reports: one filter invocation distilled to its headline numbers,
//! plus replicate aggregation for spread statistics.

use crate::bounds::bounds;
use crate::target::TargetFunction;
use crate::EstimatorError;
use ppg_core::{CheckpointId, Ppg};
use ppg_engine::{derive_replicate_seed, vpf_run_threaded, ResamplingScheme};
use serde::Serialize;
use std::time::Instant;

/// Everything a filter invocation needs besides the target.
#[derive(Clone, Copy, Debug)]
pub struct RunConfig<'a> {
    pub graph: &'a Ppg,
    pub start: CheckpointId,
    pub horizon: usize,
    pub n_particles: usize,
    pub scheme: ResamplingScheme,
    pub seed: u64,
    /// 0 selects the sequential reference runner.
    pub threads: usize,
}

/// Headline numbers for one run. Serializes to JSON with this exact field
/// order; `beta_u: null` encodes +∞.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct EstimateReport {
    pub model: Option<String>,
    pub scheme: String,
    pub n_particles: usize,
    pub horizon: usize,
    pub seed: u64,
    pub beta_l: f64,
    pub beta_u: Option<f64>,
    pub alpha_t: f64,
    pub termination_mass: f64,
    pub ess: f64,
    pub degenerate_weight_steps: u64,
    pub wall_time_s: f64,
}

/// Column names matching [`EstimateReport::csv_row`].
pub const CSV_HEADER: &str = "model,scheme,n_particles,horizon,seed,beta_l,beta_u,alpha_t,\
                              termination_mass,ess,degenerate_weight_steps,wall_time_s";

impl EstimateReport {
    pub fn csv_row(&self) -> String {
        let beta_u = match self.beta_u {
            Some(x) => x.to_string(),
            None => "inf".to_string(),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{:.6}",
            self.model.as_deref().unwrap_or(""),
            self.scheme,
            self.n_particles,
            self.horizon,
            self.seed,
            self.beta_l,
            beta_u,
            self.alpha_t,
            self.termination_mass,
            self.ess,
            self.degenerate_weight_steps,
            self.wall_time_s,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Run the filter once and certify the target's interval.
pub fn run_estimate(
    cfg: &RunConfig<'_>,
    target: &TargetFunction,
) -> Result<EstimateReport, EstimatorError> {
    let started = Instant::now();
    let ens = vpf_run_threaded(
        cfg.graph,
        cfg.start,
        cfg.horizon,
        cfg.n_particles,
        cfg.scheme,
        cfg.seed,
        cfg.threads,
    )?;
    let b = bounds(&ens, cfg.graph.nil(), target)?;
    Ok(EstimateReport {
        model: None,
        scheme: cfg.scheme.to_string(),
        n_particles: cfg.n_particles,
        horizon: cfg.horizon,
        seed: cfg.seed,
        beta_l: b.beta_l,
        beta_u: b.beta_u,
        alpha_t: b.alpha_t,
        termination_mass: b.termination_mass,
        ess: b.ess,
        degenerate_weight_steps: ens.diagnostics().degenerate_weight_steps,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// Mean / sample-std / min / max of one statistic across replicates.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct Spread {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    fn of(values: &[f64]) -> Spread {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Spread {
            mean,
            std: var.sqrt(),
            min: values.iter().cloned().fold(f64::INFINITY, f64::min),
            max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ReplicateSummary {
    pub replicates: usize,
    pub beta_l: Spread,
    /// Absent when any replicate's upper estimate was +∞.
    pub beta_u: Option<Spread>,
    pub alpha_t: Spread,
    pub ess: Spread,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ReplicateReport {
    pub runs: Vec<EstimateReport>,
    pub summary: ReplicateSummary,
}

impl ReplicateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Run `reps` independent replicates. Replicate 0 uses the configured seed
/// itself (so one replicate reproduces a plain run); replicate r > 0 uses a
/// seed derived from (seed, r).
pub fn replicate(
    cfg: &RunConfig<'_>,
    target: &TargetFunction,
    reps: usize,
) -> Result<ReplicateReport, EstimatorError> {
    assert!(reps >= 1, "replicate count must be at least 1");
    let mut runs = Vec::with_capacity(reps);
    for r in 0..reps {
        let seed = if r == 0 {
            cfg.seed
        } else {
            derive_replicate_seed(cfg.seed, r as u64)
        };
        let rep_cfg = RunConfig { seed, ..*cfg };
        runs.push(run_estimate(&rep_cfg, target)?);
    }
    let collect = |f: fn(&EstimateReport) -> f64| -> Vec<f64> { runs.iter().map(f).collect() };
    let beta_u = if runs.iter().all(|r| r.beta_u.is_some()) {
        Some(Spread::of(
            &runs.iter().map(|r| r.beta_u.unwrap()).collect::<Vec<_>>(),
        ))
    } else {
        None
    };
    let summary = ReplicateSummary {
        replicates: reps,
        beta_l: Spread::of(&collect(|r| r.beta_l)),
        beta_u,
        alpha_t: Spread::of(&collect(|r| r.alpha_t)),
        ess: Spread::of(&collect(|r| r.ess)),
    };
    Ok(ReplicateReport { runs, summary })
}
