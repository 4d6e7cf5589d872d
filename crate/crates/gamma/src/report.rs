//! Monte-Carlo verification that a sample preserves the smoothed-norm
//! objective.
//!
//! Random directions are drawn on the sphere, scaled to norms log-uniform
//! over a wide range, pushed through the matrix, and the importance-
//! weighted objective of the survivors is compared against the full sum.

use sparse_core::{SeededRng, SparseMatrix};

use crate::sample::{weighted_gamma_total, GammaSample};
use crate::scalar::gamma_total;

/// Hard clamps on the tested norm range; the instance-derived range
/// `(1/(β·n¹⁰), β·n¹⁰)` is intersected with these to stay inside
/// comfortably representable magnitudes.
pub const NORM_RANGE_CLAMP: (f64, f64) = (1e-24, 1e24);

/// Deviation statistics from [`gamma_preservation_report`].
#[derive(Debug, Clone)]
pub struct PreservationReport {
    /// Relative deviations |weighted − exact| / exact, sorted ascending.
    pub deviations: Vec<f64>,
    /// Largest observed relative deviation.
    pub max_relative_deviation: f64,
    /// Mean relative deviation.
    pub mean_relative_deviation: f64,
    /// The norm range the trial inputs were drawn from.
    pub norm_range: (f64, f64),
}

impl PreservationReport {
    /// Fraction of trials with deviation at most `threshold`.
    #[must_use]
    pub fn fraction_within(&self, threshold: f64) -> f64 {
        if self.deviations.is_empty() {
            return 1.0;
        }
        let ok = self.deviations.iter().filter(|&&d| d <= threshold).count();
        ok as f64 / self.deviations.len() as f64
    }

    /// Nearest-rank quantile of the deviation distribution, `q ∈ (0, 1]`.
    #[must_use]
    pub fn quantile(&self, q: f64) -> f64 {
        assert!(q > 0.0 && q <= 1.0, "quantile level must lie in (0, 1]");
        assert!(!self.deviations.is_empty(), "no trials recorded");
        let rank = (q * self.deviations.len() as f64).ceil() as usize;
        self.deviations[rank.saturating_sub(1)]
    }
}

/// Instance-derived default norm range `(1/(β·n¹⁰), β·n¹⁰)`, clamped.
fn default_norm_range(n: usize, t: &[f64]) -> (f64, f64) {
    let beta = t.iter().cloned().fold(1.0f64, f64::max);
    let n10 = (n as f64).powi(10);
    let hi = (beta * n10).min(NORM_RANGE_CLAMP.1);
    let lo = (1.0 / (beta * n10)).max(NORM_RANGE_CLAMP.0);
    (lo, hi.max(lo))
}

/// Draws `trials` random inputs with log-uniform norm and reports the
/// relative deviation of the sample-weighted objective from the exact one.
/// `norm_range` overrides the instance-derived default when given.
///
/// # Panics
/// Panics if dimensions disagree, `trials = 0`, or the range is invalid.
#[must_use]
pub fn gamma_preservation_report(
    a: &SparseMatrix,
    t: &[f64],
    q: f64,
    sample: &GammaSample,
    trials: usize,
    norm_range: Option<(f64, f64)>,
    rng: &mut SeededRng,
) -> PreservationReport {
    assert_eq!(t.len(), a.n_rows(), "one threshold per row required");
    assert!(trials >= 1, "need at least one trial");
    let range = norm_range.unwrap_or_else(|| default_norm_range(a.n_rows(), t));
    assert!(
        range.0 > 0.0 && range.0 <= range.1 && range.1.is_finite(),
        "invalid norm range {range:?}"
    );
    let d = a.n_cols();
    let mut deviations = Vec::with_capacity(trials);
    for _ in 0..trials {
        let norm = rng.log_uniform(range.0, range.1);
        let mut x = rng.standard_normal_vec(d);
        let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len == 0.0 {
            deviations.push(0.0);
            continue;
        }
        for v in &mut x {
            *v *= norm / len;
        }
        let mut y = vec![0.0; a.n_rows()];
        a.mul_vec(&x, &mut y);
        let exact = gamma_total(q, t, &y);
        let weighted = weighted_gamma_total(q, t, &y, sample);
        let dev = if exact == 0.0 {
            if weighted == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (weighted - exact).abs() / exact
        };
        deviations.push(dev);
    }
    deviations.sort_by(|x, y| x.partial_cmp(y).expect("deviations are never NaN"));
    let max = *deviations.last().expect("at least one trial");
    let mean = deviations.iter().sum::<f64>() / trials as f64;
    PreservationReport {
        deviations,
        max_relative_deviation: max,
        mean_relative_deviation: mean,
        norm_range: range,
    }
}
