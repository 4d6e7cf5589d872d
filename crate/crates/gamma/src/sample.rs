//! Iterative row sampling for smoothed-norm objectives, driven by square
//! roots of per-bucket leverage scores.
//!
//! Over ⌈log₂ log₂ n⌉ rounds, rows are bucketed by threshold, scored
//! within their bucket, and kept independently with probability
//!
//! ```text
//! pᵢ = min{ 1, max{ 1/n, h·√τᵢ } }
//! ```
//!
//! Surviving rows and their thresholds are rescaled by (1/pᵢ)^{1/q},
//! which by the exact homogeneity r·γ_q(t, y) = γ_q(r^{1/q}t, r^{1/q}y)
//! makes the scaled instance's objective the importance-weighted original.
//! The cumulative weights wᵢ = Π 1/pᵢ reweight the surviving coordinates
//! so that Σᵢ wᵢ·γ_q(tᵢ, yᵢ) concentrates around the full sum.

use leverage::{leverage_scores_exact, RowSample};
use sparse_core::{SeededRng, SparseMatrix};

use crate::bucket::BucketedRows;

/// Default multiplier in the oversampling parameter `h = C·d·ln n`.
///
/// Calibrated empirically: large enough that the weighted objective stays
/// within the 3/4 relative band for ≥ 99% of random inputs (99th
/// percentile deviation ≈ 0.15 on 4096×8 Gaussian and heavy-tailed
/// instances), small enough that the surviving support actually shrinks
/// on tall instances (≲ n/6 at that size).
pub const DEFAULT_OVERSAMPLING_CONSTANT: f64 = 0.04;

/// The calibrated default oversampling parameter `h` for an n×d instance.
#[must_use]
pub fn default_oversampling(n: usize, d: usize) -> f64 {
    DEFAULT_OVERSAMPLING_CONSTANT * d as f64 * (n as f64).ln().max(1.0)
}

/// What one sampling round did.
#[derive(Debug, Clone)]
pub struct SampleRound {
    /// Round index, starting at zero.
    pub round: usize,
    /// Active rows entering the round.
    pub support_in: usize,
    /// Rows surviving the round.
    pub support_out: usize,
    /// Dyadic threshold levels seen this round.
    pub levels: usize,
}

/// Output of [`gamma_sample`]: the surviving rows with their cumulative
/// weights, the rescaled thresholds, per-round diagnostics, and an
/// emptiness flag (the caller should raise `h` and retry when set).
#[derive(Debug, Clone)]
pub struct GammaSample {
    /// Surviving rows: `indices` strictly increasing; `weights[k]` is
    /// Π 1/pᵢ for row `indices[k]`; `origin_probabilities` (length n)
    /// holds the cumulative keep probability of every row along its
    /// sampled path; `weight_exponent = 1`.
    pub sample: RowSample,
    /// Rescaled thresholds, parallel to `sample.indices`.
    pub t_scaled: Vec<f64>,
    /// Per-round support sizes and level counts.
    pub rounds: Vec<SampleRound>,
    /// Set when no row survived; the caller should retry with larger `h`.
    pub flagged_empty: bool,
}

impl GammaSample {
    /// Serializes the survivors as `{"indices", "weights", "t_scaled"}`.
    #[must_use]
    pub fn to_json_string(&self) -> String {
        serde_json::json!({
            "indices": self.sample.indices,
            "weights": self.sample.weights,
            "t_scaled": self.t_scaled,
        })
        .to_string()
    }
}

/// Runs the iterative threshold-bucketed sampler on `a` with thresholds
/// `t`, exponent `q`, and oversampling parameter `h`.
///
/// # Panics
/// Panics if `q ∉ (1, 2]`, `h ≤ 0`, `t` has the wrong length, or any
/// threshold is below 1 (rescale the instance by homogeneity first).
#[must_use]
pub fn gamma_sample(
    a: &SparseMatrix,
    t: &[f64],
    q: f64,
    h: f64,
    rng: &mut SeededRng,
) -> GammaSample {
    assert!(q > 1.0 && q <= 2.0, "exponent must lie in (1, 2], got {q}");
    assert!(h > 0.0 && h.is_finite(), "oversampling parameter must be positive");
    let n = a.n_rows();
    assert_eq!(t.len(), n, "one threshold per row required");
    for (i, &ti) in t.iter().enumerate() {
        assert!(
            ti.is_finite() && ti >= 1.0,
            "threshold {i} must be ≥ 1 (rescale first), got {ti}"
        );
    }

    // z = ⌈log₂ log₂ n⌉ rounds.
    let z = if n <= 2 {
        0
    } else {
        (n as f64).log2().log2().ceil() as usize
    };
    let floor = 1.0 / n as f64;
    let inv_q = 1.0 / q;

    let mut active: Vec<usize> = (0..n).collect();
    let mut row_scale = vec![1.0; n];
    let mut t_cur = t.to_vec();
    let mut p_cum = vec![1.0; n];
    let mut rounds = Vec::with_capacity(z);

    for round in 0..z {
        if active.is_empty() {
            break;
        }
        let t_active: Vec<f64> = active.iter().map(|&i| t_cur[i]).collect();
        let bucketed = BucketedRows::build(&t_active);
        let mut survivors = Vec::with_capacity(active.len());
        for bucket in &bucketed.buckets {
            if bucket.is_empty() {
                continue;
            }
            let rows: Vec<usize> = bucket.iter().map(|&pos| active[pos]).collect();
            let tau: Vec<f64> = if rows.len() == 1 {
                vec![1.0]
            } else {
                let scales: Vec<f64> =
                    rows.iter().map(|&i| row_scale[i]).collect();
                let sub = a.select_scaled_rows(&rows, &scales);
                // Rank-deficient buckets fall back to pseudoinverse
                // scores inside the exact-score routine.
                leverage_scores_exact(&sub).values
            };
            for (&i, &tau_i) in rows.iter().zip(&tau) {
                let p = if rows.len() == 1 {
                    1.0
                } else {
                    (h * tau_i.max(0.0).sqrt()).max(floor).min(1.0)
                };
                if p >= 1.0 || rng.uniform() < p {
                    p_cum[i] *= p;
                    let boost = (1.0 / p).powf(inv_q);
                    row_scale[i] *= boost;
                    t_cur[i] *= boost;
                    survivors.push(i);
                }
            }
        }
        survivors.sort_unstable();
        rounds.push(SampleRound {
            round,
            support_in: active.len(),
            support_out: survivors.len(),
            levels: bucketed.eta(),
        });
        active = survivors;
    }

    let flagged_empty = active.is_empty();
    let weights: Vec<f64> = active.iter().map(|&i| 1.0 / p_cum[i]).collect();
    let t_scaled: Vec<f64> = active.iter().map(|&i| t_cur[i]).collect();
    GammaSample {
        sample: RowSample {
            indices: active,
            weights,
            origin_probabilities: p_cum,
            weight_exponent: 1.0,
        },
        t_scaled,
        rounds,
        flagged_empty,
    }
}

/// Importance-weighted objective `Σ_kept wᵢ·γ_q(tᵢ, yᵢ)` over the
/// original thresholds and coordinates.
///
/// # Panics
/// Panics if `t` and `y` are shorter than the largest kept index.
#[must_use]
pub fn weighted_gamma_total(q: f64, t: &[f64], y: &[f64], sample: &GammaSample) -> f64 {
    sample
        .sample
        .indices
        .iter()
        .zip(&sample.sample.weights)
        .map(|(&i, &w)| w * crate::scalar::gamma_value(q, t[i], y[i]))
        .sum()
}
