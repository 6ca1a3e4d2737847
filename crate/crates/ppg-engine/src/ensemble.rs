//! The particle ensemble: structure-of-arrays state for the filter.
//!
//! `V` is an N×m matrix of store rows (row-major), `Z` the checkpoint of
//! each particle, `W` its current weight. All particles advance in lockstep
//! — after every step each has consumed the same number of transitions —
//! which is what lets the whole population be updated with columnar sweeps
//! and resampled by row gathering.

use ppg_core::ScoreStats;
use std::io::{self, Write};

/// Counters accumulated over a run; surfaced in reports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineDiagnostics {
    /// Steps whose weight vector was all-zero (uniform fallback engaged).
    pub degenerate_weight_steps: u64,
    /// Score evaluations that clamped (e.g. density ratios above 1).
    pub score_clamps: ScoreStats,
}

/// Particle population at a fixed time index.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleEnsemble {
    /// Row-major store matrix, stride `stride` (≥ 1 even for 0-variable
    /// graphs so row chunking stays well-defined).
    pub(crate) v: Vec<f64>,
    pub(crate) z: Vec<u32>,
    pub(crate) w: Vec<f64>,
    pub(crate) m: usize,
    pub(crate) stride: usize,
    /// Time index: 1 after initialization, +1 per step.
    pub(crate) step: usize,
    pub(crate) diagnostics: EngineDiagnostics,
}

impl ParticleEnsemble {
    pub(crate) fn new_zeroed(n: usize, m: usize, s0: u32, w0: f64) -> Self {
        let stride = m.max(1);
        ParticleEnsemble {
            v: vec![0.0; n * stride],
            z: vec![s0; n],
            w: vec![w0; n],
            m,
            stride,
            step: 1,
            diagnostics: EngineDiagnostics::default(),
        }
    }

    /// Assemble an ensemble from explicit rows, checkpoints and weights.
    /// For tests and tools that need exact atom populations; the filter
    /// itself always builds its ensembles through initialization.
    pub fn from_parts(rows: Vec<Vec<f64>>, z: Vec<u32>, w: Vec<f64>, step: usize) -> Self {
        let n = rows.len();
        assert!(n >= 1, "ensemble must contain at least one particle");
        assert!(z.len() == n && w.len() == n, "misaligned ensemble columns");
        let m = rows[0].len();
        assert!(
            rows.iter().all(|r| r.len() == m),
            "rows must share one width"
        );
        let stride = m.max(1);
        let mut v = vec![0.0; n * stride];
        for (i, r) in rows.iter().enumerate() {
            v[i * stride..i * stride + m].copy_from_slice(r);
        }
        ParticleEnsemble {
            v,
            z,
            w,
            m,
            stride,
            step,
            diagnostics: EngineDiagnostics::default(),
        }
    }

    pub fn n_particles(&self) -> usize {
        self.z.len()
    }

    pub fn var_count(&self) -> usize {
        self.m
    }

    /// Time index t: the number of states each trajectory has occupied.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn checkpoints(&self) -> &[u32] {
        &self.z
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.v[i * self.stride..i * self.stride + self.m]
    }

    /// Iterate (row, checkpoint, weight) triples.
    pub fn particles(&self) -> impl Iterator<Item = (&[f64], u32, f64)> + '_ {
        (0..self.n_particles()).map(move |i| (self.row(i), self.z[i], self.w[i]))
    }

    pub fn diagnostics(&self) -> &EngineDiagnostics {
        &self.diagnostics
    }

    /// Dump the ensemble as CSV: one column per variable (named), then
    /// `checkpoint` and `weight`.
    pub fn snapshot_csv<Out: Write>(&self, var_names: &[String], mut out: Out) -> io::Result<()> {
        fn csv_field(s: &str) -> String {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        }
        let mut header: Vec<String> = var_names.iter().map(|n| csv_field(n)).collect();
        header.push("checkpoint".into());
        header.push("weight".into());
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.n_particles() {
            let mut fields: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            fields.push(self.z[i].to_string());
            fields.push(self.w[i].to_string());
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }
}
