//! Solver configuration and the step-size constant of the refinement
//! analysis.
//!
//! The refinement engine updates `x ← x − λ·Δ̃` where `Δ̃` approximately
//! maximizes the local model
//!
//! ```text
//! gᵀAΔ − c_p·γ_p(|Ax − b|, AΔ),    c_p = (p−1)/(p·2ᵖ),
//! ```
//!
//! and any step with `λ^{min{1,p−1}} ≤ (p−1)/(p·4ᵖ)` is guaranteed to
//! decrease the true objective by at least `λ` times the model value.
//! [`lemma_step`] returns the largest such guaranteed step; the default
//! line search additionally probes larger steps and keeps whichever wins
//! on the true objective, so it can only do better.

use residual::ResidualConfig;

/// Which solve route to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Pick the route from the problem shape: direct least squares at
    /// `p = 2`, model refinement otherwise, dual reduction for the
    /// kernel form.
    Auto,
    /// Kernel form only: iterate budgeted-step searches on the kernel
    /// model instead of dualizing.
    Residual,
    /// Image form without constraints only: the shrinking-threshold
    /// homotopy.
    Homotopy,
}

impl Method {
    /// Stable lowercase tag used in configs and reports.
    #[must_use]
    pub fn tag(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Residual => "residual",
            Method::Homotopy => "homotopy",
        }
    }
}

/// How the outer step size is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// Backtracking grid `{1, 1/2, 1/4, …} ∪ {lemma_step(p)}`, keeping
    /// the best true-objective value (never worse than the fixed step).
    LineSearch,
    /// Always step by `lemma_step(p)`.
    FixedLemma,
}

/// Tuning for the shrinking-threshold homotopy route.
#[derive(Debug, Clone)]
pub struct HomotopyConfig {
    /// Multiplier on `ln(n·p·t₀ᵖ/ε)` in the phase count.
    pub phase_constant: f64,
    /// Inner first-order iteration cap per phase.
    pub max_inner: usize,
    /// How many times a stalled phase is retried with a halved step cap.
    pub retry_halvings: usize,
}

impl Default for HomotopyConfig {
    fn default() -> Self {
        Self { phase_constant: 2.0, max_inner: 2000, retry_halvings: 2 }
    }
}

/// Configuration shared by every outer solve.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Route selection; incompatible choices are rejected, not coerced.
    pub method: Method,
    /// Outer step-size rule.
    pub step_rule: StepRule,
    /// Image form with `p ∈ (1, 2]` only: reduce each model's penalty
    /// term to a weighted row sample, re-drawn every outer iteration.
    pub sampled: bool,
    /// Oversampling parameter for the row sampler; `None` uses the
    /// built-in default for the instance size.
    pub oversampling: Option<f64>,
    /// Seed from which all randomness in the solve flows.
    pub seed: u64,
    /// Hard cap on outer iterations.
    pub max_outer: usize,
    /// Relative gradient target for the inner model maximizer.
    pub inner_tol: f64,
    /// Certified approximation quality of the inner maximizer: the
    /// reported gap bound is `alpha` times the measured model value.
    pub alpha: f64,
    /// Homotopy-route tuning.
    pub homotopy: HomotopyConfig,
    /// Kernel-route tuning forwarded to the budgeted-step machinery.
    pub residual: ResidualConfig,
    /// Certified multiplier for the kernel route's budget search (its
    /// winner is a constant-factor, not near-exact, maximizer).
    pub zsearch_alpha: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            step_rule: StepRule::LineSearch,
            sampled: false,
            oversampling: None,
            seed: 0,
            max_outer: 400,
            inner_tol: 1e-11,
            alpha: 2.0,
            homotopy: HomotopyConfig::default(),
            residual: ResidualConfig::default(),
            zsearch_alpha: 32.0,
        }
    }
}

/// The largest step `λ` with `λ^{min{1,p−1}} ≤ (p−1)/(p·4ᵖ)`, i.e. the
/// biggest step size whose objective decrease is guaranteed by the model
/// value alone.
///
/// # Panics
/// Panics if `p ≤ 1` or `p` is not finite.
#[must_use]
pub fn lemma_step(p: f64) -> f64 {
    assert!(p.is_finite() && p > 1.0, "exponent must exceed 1, got {p}");
    let bound = (p - 1.0) / (p * 4.0f64.powf(p));
    bound.powf(1.0 / 1.0f64.min(p - 1.0))
}

/// Conservative certified multiplier for the row-sampled model: with the
/// sampled penalty within a factor 1.75 of the full penalty (the
/// sampler's design deviation), a maximizer of the sampled model is
/// within `2·1.75^{max{1, 1/(p−1)}}` of the full model's optimum.
///
/// # Panics
/// Panics if `p ≤ 1`.
#[must_use]
pub fn sampled_certificate_alpha(p: f64) -> f64 {
    assert!(p > 1.0, "exponent must exceed 1, got {p}");
    2.0 * 1.75f64.powf(1.0f64.max(1.0 / (p - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_step_solves_its_defining_inequality_tightly() {
        for &p in &[1.25, 1.5, 2.0, 3.0, 8.0] {
            let lam = lemma_step(p);
            let lhs = lam.powf(1.0f64.min(p - 1.0));
            let bound = (p - 1.0) / (p * 4.0f64.powf(p));
            assert!(
                (lhs - bound).abs() <= 1e-12 * bound,
                "p={p}: λ^min(1,p−1) = {lhs} should equal {bound}"
            );
            assert!(lam > 0.0 && lam < 1.0, "p={p}: step {lam} outside (0,1)");
        }
    }

    #[test]
    fn quadratic_case_reduces_to_one_sixteenth_squared_exponent_scale() {
        // p = 2: bound = 1/32, exponent 1 → λ = 1/32.
        let lam = lemma_step(2.0);
        assert!((lam - 1.0 / 32.0).abs() < 1e-15, "λ(2) = {lam}");
    }

    #[test]
    fn sampled_certificate_grows_as_p_drops_toward_one() {
        assert!(sampled_certificate_alpha(1.25) > sampled_certificate_alpha(1.5));
        assert!(sampled_certificate_alpha(1.5) > sampled_certificate_alpha(2.0));
        let a2 = sampled_certificate_alpha(2.0);
        assert!((a2 - 3.5).abs() < 1e-12, "alpha(2) = {a2}");
    }
}
