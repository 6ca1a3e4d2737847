//! Resampling: draw ancestor indices from a weight vector.
//!
//! Both schemes are unbiased — conditionally on the weights, the expected
//! number of copies of cell i among `n_out` drawn indices is n_out·Ŵᵢ:
//!
//! * **Multinomial** — independent categorical draws. The textbook scheme,
//!   with binomial count variance.
//! * **Systematic** (the default) — one uniform u positions the comb
//!   (u+j)/n_out, j = 0..n_out-1, over the cumulative weights. Every count
//!   lands in {⌊n_out·Ŵᵢ⌋, ⌈n_out·Ŵᵢ⌉}, so the count variance is strictly
//!   smaller, and the whole pass costs a single random draw.
//!
//! Zero-weight cells have zero width in the cumulative distribution and are
//! never selected. The particle filter always resamples with
//! `n_out == weights.len()`; the count is a separate parameter so the
//! schemes can be exercised (and their unbiasedness measured) with small
//! weight vectors and large draw counts.

use crate::weights::{normalize_weights, WeightError};
use rand::Rng;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResamplingScheme {
    Systematic,
    Multinomial,
}

impl fmt::Display for ResamplingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResamplingScheme::Systematic => write!(f, "systematic"),
            ResamplingScheme::Multinomial => write!(f, "multinomial"),
        }
    }
}

impl FromStr for ResamplingScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "systematic" => Ok(ResamplingScheme::Systematic),
            "multinomial" => Ok(ResamplingScheme::Multinomial),
            other => Err(format!(
                "unknown resampling scheme '{other}' (expected 'systematic' or 'multinomial')"
            )),
        }
    }
}

/// Draw `n_out` ancestor indices into `weights`. Weights need not be
/// normalized; they must be finite and nonnegative. The all-zero vector
/// resamples uniformly (normalization's degenerate fallback).
pub fn resample<R: Rng + ?Sized>(
    scheme: ResamplingScheme,
    weights: &[f64],
    n_out: usize,
    rng: &mut R,
) -> Result<Vec<u32>, WeightError> {
    let normalized = normalize_weights(weights)?;
    Ok(resample_normalized(scheme, &normalized.weights, n_out, rng))
}

/// Resampling core over already-normalized weights.
pub(crate) fn resample_normalized<R: Rng + ?Sized>(
    scheme: ResamplingScheme,
    w_hat: &[f64],
    n_out: usize,
    rng: &mut R,
) -> Vec<u32> {
    match scheme {
        ResamplingScheme::Systematic => systematic(w_hat, n_out, rng),
        ResamplingScheme::Multinomial => multinomial(w_hat, n_out, rng),
    }
}

fn systematic<R: Rng + ?Sized>(w_hat: &[f64], n_out: usize, rng: &mut R) -> Vec<u32> {
    // Cap the walk at the last positive-weight cell so cumulative rounding
    // slightly below 1 cannot push the final comb positions into a
    // zero-weight tail.
    let last_positive = w_hat
        .iter()
        .rposition(|&w| w > 0.0)
        .expect("normalized weights sum to 1");
    let u: f64 = rng.gen();
    let mut indices = Vec::with_capacity(n_out);
    let mut i = 0;
    let mut cum = w_hat[0];
    for j in 0..n_out {
        let pos = (u + j as f64) / n_out as f64;
        while pos >= cum && i < last_positive {
            i += 1;
            cum += w_hat[i];
        }
        indices.push(i as u32);
    }
    indices
}

fn multinomial<R: Rng + ?Sized>(w_hat: &[f64], n_out: usize, rng: &mut R) -> Vec<u32> {
    // Cumulative table over the positive cells only, so the search can
    // never land on zero-weight indices.
    let mut cum = Vec::with_capacity(w_hat.len());
    let mut acc = 0.0;
    for (i, &w) in w_hat.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            cum.push((acc, i as u32));
        }
    }
    (0..n_out)
        .map(|_| {
            let u: f64 = rng.gen();
            let k = cum.partition_point(|&(c, _)| c <= u);
            cum[k.min(cum.len() - 1)].1
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn counts(indices: &[u32], cells: usize) -> Vec<usize> {
        let mut c = vec![0; cells];
        for &i in indices {
            c[i as usize] += 1;
        }
        c
    }

    #[test]
    fn all_mass_on_one_cell() {
        let mut rng = RngStream::new(1);
        for scheme in [ResamplingScheme::Systematic, ResamplingScheme::Multinomial] {
            let idx = resample(scheme, &[0.0, 1.0, 0.0], 64, &mut rng).unwrap();
            assert!(idx.iter().all(|&i| i == 1), "{scheme}: {idx:?}");
        }
    }

    #[test]
    fn systematic_on_even_pair_yields_one_of_each() {
        // With weights (1,1) and two outputs the comb positions are
        // u/2 < 1/2 and (u+1)/2 in [1/2, 1): always one copy of each.
        for seed in 0..50 {
            let mut rng = RngStream::new(seed);
            let idx = resample(ResamplingScheme::Systematic, &[1.0, 1.0], 2, &mut rng).unwrap();
            assert_eq!(idx, vec![0, 1]);
        }
    }

    #[test]
    fn systematic_counts_are_floor_or_ceil() {
        let weights = [0.1, 0.0, 0.27, 0.4, 0.03, 0.2];
        let n_out = 97usize;
        for seed in 0..50 {
            let mut rng = RngStream::new(seed);
            let idx =
                resample(ResamplingScheme::Systematic, &weights, n_out, &mut rng).unwrap();
            let c = counts(&idx, weights.len());
            for (i, &w) in weights.iter().enumerate() {
                let expected = n_out as f64 * w; // weights already sum to 1
                let lo = expected.floor() as usize;
                let hi = expected.ceil() as usize;
                assert!(
                    (lo..=hi).contains(&c[i]),
                    "seed {seed}: cell {i} count {} outside [{lo}, {hi}]",
                    c[i]
                );
            }
        }
    }

    #[test]
    fn multinomial_concentrates_on_expected_counts() {
        // Weights (1,3), 1e5 draws: count of cell 1 is Binomial(1e5, 0.75),
        // sd ≈ 137, so ±600 is well past 4σ.
        let mut rng = RngStream::new(2024);
        let idx =
            resample(ResamplingScheme::Multinomial, &[1.0, 3.0], 100_000, &mut rng).unwrap();
        let c1 = idx.iter().filter(|&&i| i == 1).count() as i64;
        assert!(
            (c1 - 75_000).abs() <= 600,
            "count of index 1 was {c1}, expected 75000 +/- 600"
        );
    }

    #[test]
    fn zero_weight_cells_never_selected() {
        let w = [0.0, 0.3, 0.0, 0.7, 0.0];
        for seed in 0..10 {
            let mut rng = RngStream::new(seed);
            for scheme in [ResamplingScheme::Systematic, ResamplingScheme::Multinomial] {
                let idx = resample(scheme, &w, 256, &mut rng).unwrap();
                assert!(idx.iter().all(|&i| w[i as usize] > 0.0));
            }
        }
    }

    #[test]
    fn invalid_weights_propagate_errors() {
        let mut rng = RngStream::new(0);
        assert!(resample(ResamplingScheme::Systematic, &[-1.0, 2.0], 2, &mut rng).is_err());
    }

    #[test]
    fn all_zero_resamples_uniformly() {
        let mut rng = RngStream::new(3);
        let idx = resample(ResamplingScheme::Systematic, &[0.0; 10], 10, &mut rng).unwrap();
        // Uniform fallback: the systematic comb copies everyone once.
        assert_eq!(idx, (0..10).collect::<Vec<u32>>());
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!(
            "systematic".parse::<ResamplingScheme>().unwrap(),
            ResamplingScheme::Systematic
        );
        assert!("stratified".parse::<ResamplingScheme>().is_err());
    }
}
