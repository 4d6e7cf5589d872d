//! Independent row sampling driven by score overestimates.
//!
//! Given per-row overestimates `u`, a rate `α`, and a constant `c`, row i is
//! kept independently with probability
//!
//! ```text
//! pᵢ = min{1, α·uᵢ·c·ln d}
//! ```
//!
//! and a kept row is rescaled by `pᵢ^{-1/2}` so the sampled gram matrix is
//! unbiased: E[(SA)ᵀ(SA)] = AᵀA.

use sparse_core::SeededRng;

use crate::scores::LeverageEstimate;

/// A sampled row subset with rescaling weights.
#[derive(Debug, Clone)]
pub struct RowSample {
    /// Kept row ids, strictly increasing.
    pub indices: Vec<usize>,
    /// Rescale factor for each kept row (`pᵢ` raised to `-weight_exponent`).
    pub weights: Vec<f64>,
    /// The keep probability used for every row (length n, kept or not).
    pub origin_probabilities: Vec<f64>,
    /// Exponent of `1/pᵢ` in the weights: 1/2 for spectral (2-norm)
    /// sampling, 1/q for smoothed-q-norm sampling.
    pub weight_exponent: f64,
}

impl RowSample {
    /// The sample that keeps every one of `n` rows at weight 1.
    #[must_use]
    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
            weights: vec![1.0; n],
            origin_probabilities: vec![1.0; n],
            weight_exponent: 0.5,
        }
    }

    /// Expected number of kept rows, Σ pᵢ.
    #[must_use]
    pub fn expected_rows(&self) -> f64 {
        self.origin_probabilities.iter().sum()
    }
}

/// ln(d) with a floor of 1, so single-column systems still sample.
#[must_use]
pub fn log_dimension(d: usize) -> f64 {
    (d as f64).ln().max(1.0)
}

/// Samples rows independently with `pᵢ = min{1, α·uᵢ·c·ln d}` and spectral
/// weights `pᵢ^{-1/2}`. Infinite scores force `pᵢ = 1`.
///
/// # Panics
/// Panics if `α ≤ 0`, `c ≤ 0`, `d = 0`, or any score is negative/NaN.
#[must_use]
pub fn sample_rows(
    u: &LeverageEstimate,
    alpha: f64,
    c: f64,
    d: usize,
    rng: &mut SeededRng,
) -> RowSample {
    assert!(alpha > 0.0, "sampling rate must be positive");
    assert!(c > 0.0, "sampling constant must be positive");
    assert!(d > 0, "column count must be positive");
    let log_d = log_dimension(d);

    let n = u.values.len();
    let mut indices = Vec::new();
    let mut weights = Vec::new();
    let mut origin_probabilities = Vec::with_capacity(n);
    for (i, &ui) in u.values.iter().enumerate() {
        assert!(ui >= 0.0, "score {i} is negative or NaN: {ui}");
        let p = if ui.is_infinite() {
            1.0
        } else {
            (alpha * ui * c * log_d).min(1.0)
        };
        origin_probabilities.push(p);
        if p >= 1.0 || rng.uniform() < p {
            indices.push(i);
            weights.push(p.powf(-0.5));
        }
    }
    RowSample {
        indices,
        weights,
        origin_probabilities,
        weight_exponent: 0.5,
    }
}
