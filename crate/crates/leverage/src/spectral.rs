//! Iterative spectral approximation by repeated leverage-guided row
//! sampling.
//!
//! Starting from the all-ones score overestimate, each round undersamples
//! the matrix, sketches leverage scores against the undersampled copy, and
//! tightens the running overestimate by taking elementwise minima:
//!
//! ```text
//! u⁰ = 1
//! for i in 0..⌈log₂(n/d)⌉:
//!     αᵢ  = min(12d / ‖uⁱ‖₁, 1)
//!     Sᵢ  = √(3αᵢ/4) · Sample(uⁱ, 9αᵢ, c)
//!     uⁱ⁺¹ = min(uⁱ, sketched scores against SᵢA)
//! Ã = (3/2)^{-1/2} · Sample(u_z, 4, c) · A
//! ```
//!
//! The final weighted row subset Ã satisfies, with high probability,
//! `(1/4)·AᵀA ⪯ ÃᵀÃ ⪯ AᵀA`; when every final keep-probability saturates
//! at 1 the downscale is skipped and the guarantee tightens to equality
//! for square invertible inputs. Rank-deficient or empty draws are
//! retried with doubled sampling rate up to a configurable cap.

use linear_solvers::{build_inverse_operator, LinearSolverError};
use sparse_core::{SeededRng, SparseMatrix};

use crate::error::LeverageError;
use crate::jl::{algorithm_sketch_rows, estimate_leverage_jl};
use crate::sampling::{sample_rows, RowSample};
use crate::scores::LeverageEstimate;

/// Tuning knobs for [`spectral_approximation`].
#[derive(Debug, Clone)]
pub struct SpectralConfig {
    /// Oversampling constant multiplying `ln d` in keep probabilities.
    pub c: f64,
    /// How many times a failed round may be retried with doubled rate.
    pub retry_cap: usize,
    /// Scores are floored here to keep later rounds' probabilities positive.
    pub score_floor: f64,
    /// Accuracy requested from the per-round Gram inverse operators.
    pub build_tol: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            c: 30.0,
            retry_cap: 4,
            score_floor: 1e-300,
            build_tol: 1e-10,
        }
    }
}

/// What one sampling round did.
#[derive(Debug, Clone)]
pub struct RoundLog {
    /// Round index, starting at zero.
    pub round: usize,
    /// Base sampling rate `min(12d/‖u‖₁, 1)` before any retry doubling.
    pub alpha: f64,
    /// Rows kept by the round's accepted draw.
    pub sampled_rows: usize,
    /// Retries spent before the draw was accepted.
    pub retries: usize,
    /// Sketch rows used for the score estimate.
    pub sketch_rows: usize,
}

/// Result of [`spectral_approximation`].
#[derive(Debug, Clone)]
pub struct SpectralOutcome {
    /// The weighted row subset Ã (weights already folded into the rows).
    pub approx: SparseMatrix,
    /// The final sample: indices, folded weights, keep probabilities.
    pub sample: RowSample,
    /// The final score overestimate the sample was drawn from.
    pub scores: LeverageEstimate,
    /// Per-round diagnostics.
    pub rounds: Vec<RoundLog>,
    /// Whether the final `(3/2)^{-1/2}` downscale was applied (it is
    /// skipped when every keep probability saturated at 1).
    pub downscaled: bool,
}

/// Draws `Sample(u, alpha, c)` and scales the kept weights by `scale`,
/// then materializes the weighted row subset. Returns the sample, the
/// subset, and an inverse operator for its Gram matrix, or `None` when the
/// draw is empty or its Gram matrix cannot be inverted to tolerance.
fn try_draw(
    a: &SparseMatrix,
    scores: &LeverageEstimate,
    alpha: f64,
    scale: f64,
    config: &SpectralConfig,
    rng: &mut SeededRng,
) -> Option<(RowSample, SparseMatrix, linear_solvers::InverseOperator)> {
    let mut sample = sample_rows(scores, alpha, config.c, a.n_cols(), rng);
    if sample.indices.is_empty() {
        return None;
    }
    if scale != 1.0 {
        for w in &mut sample.weights {
            *w *= scale;
        }
    }
    let sa = a.select_scaled_rows(&sample.indices, &sample.weights);
    match build_inverse_operator(&sa, &vec![1.0; sa.n_rows()], config.build_tol) {
        Ok(inv) => Some((sample, sa, inv)),
        Err(LinearSolverError::RankDeficient { .. })
        | Err(LinearSolverError::AccuracyNotMet { .. }) => None,
        Err(e) => {
            // Other failures are not recoverable by resampling.
            panic!("inverse build failed unrecoverably: {e}");
        }
    }
}

/// Computes a weighted row subset Ã of `a` whose Gram matrix spectrally
/// approximates `AᵀA` within a factor 4, by iterated leverage-score
/// sampling with sketched score estimates.
///
/// # Errors
/// Returns [`LeverageError::RetriesExhausted`] when some round (or the
/// final draw) keeps failing after the configured number of retries.
///
/// # Panics
/// Panics if `a` has fewer rows than columns or no columns.
pub fn spectral_approximation(
    a: &SparseMatrix,
    rng: &mut SeededRng,
    config: &SpectralConfig,
) -> Result<SpectralOutcome, LeverageError> {
    let n = a.n_rows();
    let d = a.n_cols();
    assert!(d >= 1 && n >= d, "need n ≥ d ≥ 1");
    let sketch_rows = algorithm_sketch_rows(n, d);
    let z = ((n as f64) / (d as f64)).log2().ceil().max(0.0) as usize;

    let mut scores = LeverageEstimate::from_values(vec![1.0; n], true);
    let mut rounds = Vec::with_capacity(z);
    for round in 0..z {
        let alpha = (12.0 * d as f64 / scores.sum).min(1.0);
        let mut accepted = None;
        for attempt in 0..=config.retry_cap {
            let alpha_eff = alpha * (1u64 << attempt) as f64;
            let scale = (3.0 * alpha_eff / 4.0).sqrt();
            if let Some(draw) =
                try_draw(a, &scores, 9.0 * alpha_eff, scale, config, rng)
            {
                accepted = Some((draw, attempt));
                break;
            }
        }
        let Some(((sample, _sa, inv), retries)) = accepted else {
            return Err(LeverageError::RetriesExhausted {
                round,
                attempts: config.retry_cap + 1,
            });
        };
        let estimate = estimate_leverage_jl(a, &sample, &inv, sketch_rows, rng);
        let tightened: Vec<f64> = scores
            .values
            .iter()
            .zip(&estimate.values)
            .map(|(&old, &new)| old.min(new).max(config.score_floor))
            .collect();
        rounds.push(RoundLog {
            round,
            alpha,
            sampled_rows: sample.indices.len(),
            retries,
            sketch_rows,
        });
        scores = LeverageEstimate::from_values(tightened, true);
    }

    // Final draw at rate 4, downscaled by (3/2)^{-1/2} unless every keep
    // probability saturated (then the subset is exact, e.g. square inputs).
    let mut last_err = LeverageError::RetriesExhausted {
        round: z,
        attempts: config.retry_cap + 1,
    };
    for attempt in 0..=config.retry_cap {
        let alpha_eff = 4.0 * (1u64 << attempt) as f64;
        let Some((mut sample, _, _)) =
            try_draw(a, &scores, alpha_eff, 1.0, config, rng)
        else {
            continue;
        };
        let saturated = sample
            .origin_probabilities
            .iter()
            .all(|&p| p >= 1.0);
        if !saturated {
            let scale = (2.0f64 / 3.0).sqrt();
            for w in &mut sample.weights {
                *w *= scale;
            }
        }
        let approx = a.select_scaled_rows(&sample.indices, &sample.weights);
        match build_inverse_operator(
            &approx,
            &vec![1.0; approx.n_rows()],
            config.build_tol,
        ) {
            Ok(_) => {
                return Ok(SpectralOutcome {
                    approx,
                    sample,
                    scores,
                    rounds,
                    downscaled: !saturated,
                });
            }
            Err(LinearSolverError::RankDeficient { .. })
            | Err(LinearSolverError::AccuracyNotMet { .. }) => {
                last_err = LeverageError::RetriesExhausted {
                    round: z,
                    attempts: attempt + 1,
                };
            }
            Err(e) => return Err(LeverageError::Solver(e)),
        }
    }
    Err(last_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scores::leverage_scores_exact;
    use oracle::dense::{dense_to_dmatrix, generalized_eigen_range};
    use sparse_core::DenseMatrix;

    fn random_tall(n: usize, d: usize, seed: u64) -> SparseMatrix {
        let mut rng = SeededRng::new(seed, 7);
        let mut trip = Vec::new();
        for i in 0..n {
            for j in 0..d {
                if i % d == j || rng.uniform() < 0.4 {
                    trip.push((i, j, rng.standard_normal()));
                }
            }
        }
        SparseMatrix::from_triplets(n, d, &trip).unwrap()
    }

    fn gram_as_dmatrix(m: &SparseMatrix) -> nalgebra::DMatrix<f64> {
        let g: DenseMatrix = m.gram_dense();
        dense_to_dmatrix(&g)
    }

    #[test]
    fn square_invertible_input_is_reproduced_exactly() {
        let mut rng = SeededRng::new(71, 0);
        let d = 8;
        let mut trip = Vec::new();
        for i in 0..d {
            for j in 0..d {
                trip.push((i, j, rng.standard_normal() + if i == j { 4.0 } else { 0.0 }));
            }
        }
        let a = SparseMatrix::from_triplets(d, d, &trip).unwrap();
        let out = spectral_approximation(&a, &mut rng, &SpectralConfig::default())
            .expect("square input must not fail");
        assert!(out.rounds.is_empty(), "n = d needs zero tightening rounds");
        assert!(!out.downscaled, "saturated draw must skip the downscale");
        assert_eq!(out.approx, a, "square invertible input must come back exactly");
        assert_eq!(out.sample.indices.len(), d);
        for &w in &out.sample.weights {
            assert_eq!(w, 1.0, "saturated rows carry unit weight");
        }
    }

    #[test]
    fn certificate_brackets_the_gram_spectrum() {
        for seed in [11u64, 12, 13] {
            let a = random_tall(320, 20, seed);
            let mut rng = SeededRng::new(seed, 1);
            let out =
                spectral_approximation(&a, &mut rng, &SpectralConfig::default())
                    .expect("well-conditioned instance must succeed");
            let approx_gram = gram_as_dmatrix(&out.approx);
            let exact_gram = gram_as_dmatrix(&a);
            let (lo, hi) = generalized_eigen_range(&approx_gram, &exact_gram);
            assert!(
                lo >= 0.25 - 1e-9,
                "seed {seed}: lower certificate {lo} below 1/4"
            );
            assert!(
                hi <= 1.0 + 1e-6,
                "seed {seed}: upper certificate {hi} above 1"
            );
            assert!(out.sample.indices.len() <= 320);
        }
    }

    #[test]
    fn round_rates_never_decrease() {
        let a = random_tall(512, 8, 21);
        let mut rng = SeededRng::new(22, 0);
        let out = spectral_approximation(&a, &mut rng, &SpectralConfig::default())
            .expect("instance must succeed");
        assert!(!out.rounds.is_empty());
        for pair in out.rounds.windows(2) {
            assert!(
                pair[1].alpha >= pair[0].alpha - 1e-12,
                "rate fell between rounds {} and {}: {} -> {}",
                pair[0].round,
                pair[1].round,
                pair[0].alpha,
                pair[1].alpha
            );
        }
        let max_score = out
            .scores
            .values
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v));
        assert!(max_score <= 1.0 + 1e-12, "scores only ever tighten below 1");
    }

    #[test]
    fn undersampled_draws_stay_spectrally_below_the_gram() {
        // A rate-α draw scaled by √(3α/4) must keep (SA)ᵀ(SA) ⪯ AᵀA in
        // nearly every trial.
        let n = 1200;
        let d = 5;
        let a = random_tall(n, d, 41);
        let exact = leverage_scores_exact(&a);
        let exact_gram = gram_as_dmatrix(&a);
        let mut rng = SeededRng::new(42, 0);
        let mut ok = 0;
        let trials = 100;
        let mut nontrivial = 0;
        for _ in 0..trials {
            let alpha = 0.1 + 0.9 * rng.uniform();
            let mut sample = sample_rows(&exact, 9.0 * alpha, 30.0, d, &mut rng);
            let scale = (3.0 * alpha / 4.0).sqrt();
            for w in &mut sample.weights {
                *w *= scale;
            }
            if sample.indices.len() < n {
                nontrivial += 1;
            }
            let sa = a.select_scaled_rows(&sample.indices, &sample.weights);
            let sub_gram = gram_as_dmatrix(&sa);
            let (_, hi) = generalized_eigen_range(&sub_gram, &exact_gram);
            if hi <= 1.0 + 1e-9 {
                ok += 1;
            }
        }
        assert!(
            nontrivial >= 50,
            "test instance too small to exercise real subsampling ({nontrivial})"
        );
        assert!(ok >= 95, "upper bound held in only {ok}/{trials} trials");
    }

    #[test]
    fn hopeless_rates_exhaust_the_retry_budget() {
        let a = random_tall(64, 4, 51);
        let mut rng = SeededRng::new(52, 0);
        let config = SpectralConfig {
            c: 1e-12,
            ..SpectralConfig::default()
        };
        let err = spectral_approximation(&a, &mut rng, &config)
            .expect_err("vanishing rate cannot produce a full-rank draw");
        match err {
            LeverageError::RetriesExhausted { round, attempts } => {
                assert_eq!(round, 0, "failure must surface in the first round");
                assert_eq!(attempts, 5, "cap of 4 retries means 5 attempts");
            }
            other => panic!("unexpected error: {other}"),
        }
    }
}
