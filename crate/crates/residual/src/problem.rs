//! Problem statement and derived iteration parameters for the smoothed
//! residual subproblem
//!
//! ```text
//! minimize  Σᵢ γ_p(tᵢ, Δᵢ)   subject to   AᵀΔ = 0,   gᵀΔ = z,
//! ```
//!
//! the budgeted form whose maximization twin `gᵀΔ − c·Σγ_p` is recovered by
//! searching over the budget `z`.

use sparse_core::SparseMatrix;

/// A budgeted smoothed-residual instance.
///
/// `a` is the n×d constraint matrix (solutions stay in its kernel), `g` the
/// linear functional being traded against the smoothed penalty, `t` the
/// per-coordinate smoothing thresholds, `z` the required value of `gᵀΔ`,
/// and `p ≥ 2` the penalty exponent.
#[derive(Debug, Clone)]
pub struct ResidualProblem {
    /// Constraint matrix; feasible steps satisfy `AᵀΔ = 0`.
    pub a: SparseMatrix,
    /// Linear functional, one entry per coordinate of Δ.
    pub g: Vec<f64>,
    /// Smoothing thresholds, one nonnegative entry per coordinate.
    pub t: Vec<f64>,
    /// Budget: accepted steps satisfy `gᵀΔ = z`.
    pub z: f64,
    /// Penalty exponent, at least 2.
    pub p: f64,
}

impl ResidualProblem {
    /// Bundles and validates an instance.
    ///
    /// # Panics
    /// Panics when the dimensions disagree, a threshold is negative or
    /// non-finite, `z` is not finite, or `p < 2`.
    #[must_use]
    pub fn new(a: SparseMatrix, g: Vec<f64>, t: Vec<f64>, z: f64, p: f64) -> Self {
        let n = a.n_rows();
        assert_eq!(g.len(), n, "gradient length {} != row count {n}", g.len());
        assert_eq!(t.len(), n, "threshold length {} != row count {n}", t.len());
        assert!(
            t.iter().all(|&ti| ti.is_finite() && ti >= 0.0),
            "thresholds must be finite and nonnegative"
        );
        assert!(
            g.iter().all(|&gi| gi.is_finite()),
            "gradient entries must be finite"
        );
        assert!(z.is_finite(), "budget must be finite, got {z}");
        assert!(p.is_finite() && p >= 2.0, "exponent must be ≥ 2, got {p}");
        Self { a, g, t, z, p }
    }

    /// Number of coordinates of Δ.
    #[must_use]
    pub fn dimension(&self) -> usize {
        self.g.len()
    }
}

/// Tuning knobs for [`crate::solve_residual`].
#[derive(Debug, Clone)]
pub struct ResidualConfig {
    /// Shared scale constant multiplying the significance threshold, the
    /// resistance cap, the step size, and the acceptance threshold.
    pub constant: f64,
    /// Shapes the scheduled-rebuild period `⌈(n / m_knob)^{(p−2)/(3p−2)}⌉`.
    pub m_knob: f64,
    /// Relative tolerance for the constraint and budget residuals of every
    /// inner weighted solve.
    pub tol_c: f64,
    /// Overrides the derived iteration count when set (test harnesses that
    /// want long maintenance histories).
    pub iteration_override: Option<usize>,
    /// Collect one JSON line per iteration into the outcome.
    pub collect_trace: bool,
    /// Record per-iteration snapshots of the maintained inverse and the
    /// band diagonals for offline comparison (small instances only).
    pub audit: bool,
}

impl Default for ResidualConfig {
    fn default() -> Self {
        Self {
            constant: 1.0,
            m_knob: 1.0,
            tol_c: 1e-10,
            iteration_override: None,
            collect_trace: false,
            audit: false,
        }
    }
}

/// Iteration parameters derived from `(p, n)` and the shared constant:
///
/// ```text
/// rho   = C · n^{(p² − 4p + 2) / (p(3p − 2))}     significance threshold
/// beta  = C · n^{(p − 2) / (3p − 2)}              resistance boost cap
/// alpha = C · n^{−(p² − 5p + 2) / (p(3p − 2))}    step size
/// tau   = C · n^{(p − 1)(p − 2) / (3p − 2)}       acceptance threshold
/// T     = ⌈α⁻¹ · n^{1/p}⌉                          iteration budget
/// ```
///
/// At `p = 2` the exponents collapse so that `T = ⌈1/C⌉`: with the default
/// constant the loop degenerates to a single weighted least-squares solve.
#[derive(Debug, Clone)]
pub struct ResidualParameters {
    /// Coordinates with `|Δⱼ| ≥ rho` are eligible for a resistance boost.
    pub rho: f64,
    /// Only coordinates with `rⱼ ≤ beta` are boosted.
    pub beta: f64,
    /// Step size applied to accepted solutions.
    pub alpha: f64,
    /// Acceptance threshold on `‖Δ‖_p^p`.
    pub tau: f64,
    /// Iteration budget.
    pub iterations: usize,
    /// Scheduled full-rebuild period for the maintained inverse.
    pub rebuild_period: usize,
}

impl ResidualParameters {
    /// Derives the parameter set for an n-coordinate instance.
    ///
    /// # Panics
    /// Panics when `p < 2`, `n = 0`, or the config constants are not
    /// positive.
    #[must_use]
    pub fn derive(p: f64, n: usize, config: &ResidualConfig) -> Self {
        assert!(p >= 2.0, "exponent must be ≥ 2, got {p}");
        assert!(n > 0, "instance must have at least one coordinate");
        assert!(
            config.constant > 0.0 && config.constant.is_finite(),
            "scale constant must be positive"
        );
        assert!(
            config.m_knob > 0.0 && config.m_knob.is_finite(),
            "rebuild knob must be positive"
        );
        let nf = n as f64;
        let c = config.constant;
        let denom = p * (3.0 * p - 2.0);
        let rho = c * nf.powf((p * p - 4.0 * p + 2.0) / denom);
        let beta = c * nf.powf((p - 2.0) / (3.0 * p - 2.0));
        let alpha = c * nf.powf(-(p * p - 5.0 * p + 2.0) / denom);
        let tau = c * nf.powf((p - 1.0) * (p - 2.0) / (3.0 * p - 2.0));
        let iterations = (nf.powf(1.0 / p) / alpha).ceil().max(1.0) as usize;
        let rebuild_period = ((nf / config.m_knob)
            .powf((p - 2.0) / (3.0 * p - 2.0)))
        .ceil()
        .max(1.0) as usize;
        Self {
            rho,
            beta,
            alpha,
            tau,
            iterations,
            rebuild_period,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparse_core::SparseMatrix;

    #[test]
    fn quadratic_exponent_collapses_to_one_solve() {
        let config = ResidualConfig::default();
        let params = ResidualParameters::derive(2.0, 4096, &config);
        // (p−2) exponents vanish: beta = tau = C; alpha = C·√n; T = 1.
        assert!((params.beta - 1.0).abs() < 1e-12, "beta {}", params.beta);
        assert!((params.tau - 1.0).abs() < 1e-12, "tau {}", params.tau);
        let root = 4096f64.sqrt();
        assert!(
            (params.alpha - root).abs() / root < 1e-12,
            "alpha {} != √n {root}",
            params.alpha
        );
        assert_eq!(params.iterations, 1, "quadratic case runs one iteration");
    }

    #[test]
    fn parameter_scales_follow_the_shared_constant() {
        let base = ResidualParameters::derive(4.0, 256, &ResidualConfig::default());
        let doubled = ResidualParameters::derive(
            4.0,
            256,
            &ResidualConfig {
                constant: 2.0,
                ..ResidualConfig::default()
            },
        );
        assert!((doubled.rho / base.rho - 2.0).abs() < 1e-12);
        assert!((doubled.beta / base.beta - 2.0).abs() < 1e-12);
        assert!((doubled.alpha / base.alpha - 2.0).abs() < 1e-12);
        assert!((doubled.tau / base.tau - 2.0).abs() < 1e-12);
        // T = α⁻¹ n^{1/p} halves (up to ceiling) when C doubles.
        assert!(doubled.iterations <= base.iterations);
    }

    #[test]
    fn rebuild_period_grows_with_instance_size() {
        let config = ResidualConfig::default();
        let small = ResidualParameters::derive(4.0, 64, &config);
        let large = ResidualParameters::derive(4.0, 4096, &config);
        assert!(
            large.rebuild_period >= small.rebuild_period,
            "period should not shrink: {} vs {}",
            large.rebuild_period,
            small.rebuild_period
        );
        assert!(small.rebuild_period >= 1);
    }

    #[test]
    #[should_panic(expected = "exponent must be ≥ 2")]
    fn sub_quadratic_exponent_rejected() {
        let a = SparseMatrix::identity(3);
        let _ = ResidualProblem::new(a, vec![1.0; 3], vec![1.0; 3], 1.0, 1.5);
    }

    #[test]
    #[should_panic(expected = "thresholds must be finite and nonnegative")]
    fn negative_threshold_rejected() {
        let a = SparseMatrix::identity(3);
        let _ = ResidualProblem::new(a, vec![1.0; 3], vec![1.0, -1.0, 1.0], 1.0, 4.0);
    }
}
