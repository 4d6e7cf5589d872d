//! Randomized verification of the smoothed-norm function's analytic
//! properties.
//!
//! Each predicate draws random parameters in the regime its statement
//! covers and measures the worst relative violation; a draw fails when
//! the violation exceeds the allowed slack. All predicates are exact
//! mathematical facts, so every failure indicates an implementation bug
//! (or floating-point slack set below roundoff).

use sparse_core::SeededRng;

use crate::scalar::{
    gamma_derivative, gamma_value, sandwich_lower_coefficient,
    sandwich_upper_coefficient,
};

/// Outcome of one predicate over its draws.
#[derive(Debug, Clone)]
pub struct PredicateResult {
    /// Stable predicate name.
    pub name: &'static str,
    /// Number of random draws checked.
    pub draws: usize,
    /// Draws whose relative violation exceeded the slack.
    pub failures: usize,
    /// Largest relative violation seen (0 when the predicate held with
    /// margin everywhere).
    pub worst_violation: f64,
}

struct Tally {
    failures: usize,
    worst: f64,
    slack: f64,
}

impl Tally {
    fn new(slack: f64) -> Self {
        Self {
            failures: 0,
            worst: 0.0,
            slack,
        }
    }

    /// Records `lhs ≤ rhs` measured relative to `scale`.
    fn le(&mut self, lhs: f64, rhs: f64, scale: f64) {
        let violation = (lhs - rhs) / scale.max(1e-300);
        if violation > self.worst {
            self.worst = violation;
        }
        if violation > self.slack {
            self.failures += 1;
        }
    }

    fn into_result(self, name: &'static str, draws: usize) -> PredicateResult {
        PredicateResult {
            name,
            draws,
            failures: self.failures,
            worst_violation: self.worst,
        }
    }
}

fn signed_log_uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
    sign * rng.log_uniform(lo, hi)
}

/// `|t|^p + l·y + ((p−1)/(p·2^p))·γ ≤ |t+y|^p ≤ |t|^p + l·y + 2^p·γ`
/// with `l = p·|t|^{p−2}·t` and `γ = γ_p(|t|, y)`.
fn power_sandwich(draws: usize, slack: f64, rng: &mut SeededRng) -> PredicateResult {
    let mut tally = Tally::new(slack);
    for _ in 0..draws {
        let p = 1.0 + 7.0 * rng.uniform().max(1e-4);
        let t = signed_log_uniform(rng, 1e-3, 1e3);
        let y = signed_log_uniform(rng, 1e-3, 1e3);
        let gamma = gamma_value(p, t.abs(), y);
        let linear = p * t.abs().powf(p - 2.0) * t;
        let base = t.abs().powf(p) + linear * y;
        let exact = (t + y).abs().powf(p);
        let c_lower = sandwich_lower_coefficient(p);
        let c_upper = sandwich_upper_coefficient(p);
        let scale = exact
            .abs()
            .max(base.abs())
            .max(c_upper * gamma)
            .max(1.0);
        tally.le(base + c_lower * gamma, exact, scale);
        tally.le(exact, base + c_upper * gamma, scale);
    }
    tally.into_result("power_sandwich", draws)
}

/// `min{λ², λ^p}·γ_p(|t|, y) ≤ γ_p(|t|, λy) ≤ max{λ², λ^p}·γ_p(|t|, y)`.
fn scaling_envelope(draws: usize, slack: f64, rng: &mut SeededRng) -> PredicateResult {
    let mut tally = Tally::new(slack);
    for _ in 0..draws {
        let p = 1.0 + 7.0 * rng.uniform().max(1e-4);
        let t = signed_log_uniform(rng, 1e-3, 1e3).abs();
        let y = signed_log_uniform(rng, 1e-3, 1e3);
        let lambda = rng.log_uniform(1e-3, 1e3);
        let base = gamma_value(p, t, y);
        let scaled = gamma_value(p, t, lambda * y);
        let l2 = lambda * lambda;
        let lp = lambda.powf(p);
        let scale = scaled.max(l2.max(lp) * base).max(1e-12);
        tally.le(l2.min(lp) * base, scaled, scale);
        tally.le(scaled, l2.max(lp) * base, scale);
    }
    tally.into_result("scaling_envelope", draws)
}

/// `r·γ_q(t, y) = γ_q(r^{1/q}·t, r^{1/q}·y)` exactly.
fn homogeneity(draws: usize, slack: f64, rng: &mut SeededRng) -> PredicateResult {
    let mut tally = Tally::new(slack);
    for _ in 0..draws {
        let q = 1.0 + rng.uniform().max(1e-4);
        let t = rng.log_uniform(1e-3, 1e3);
        let y = signed_log_uniform(rng, 1e-3, 1e3);
        let r = rng.log_uniform(1e-6, 1e6);
        let lhs = r * gamma_value(q, t, y);
        let root = r.powf(1.0 / q);
        let rhs = gamma_value(q, root * t, root * y);
        let scale = lhs.abs().max(rhs.abs()).max(1e-12);
        tally.le((lhs - rhs).abs(), 0.0, scale);
    }
    tally.into_result("homogeneity", draws)
}

/// For q ≥ 2: `t^{q−2}y² + |y|^q ≤ 2γ_q(t, y) ≤ q·(t^{q−2}y² + |y|^q)`.
fn two_sided_power_bound(
    draws: usize,
    slack: f64,
    rng: &mut SeededRng,
) -> PredicateResult {
    let mut tally = Tally::new(slack);
    for _ in 0..draws {
        let q = 2.0 + 6.0 * rng.uniform();
        let t = rng.log_uniform(1e-3, 1e3);
        let y = signed_log_uniform(rng, 1e-3, 1e3);
        let split = t.powf(q - 2.0) * y * y + y.abs().powf(q);
        let gamma = gamma_value(q, t, y);
        let scale = split.max(2.0 * gamma).max(1e-12);
        tally.le(split, 2.0 * gamma, scale);
        tally.le(2.0 * gamma, q * split, scale);
    }
    tally.into_result("two_sided_power_bound", draws)
}

/// Both branches of the value and the derivative agree at |x| = t.
fn seam_continuity(draws: usize, slack: f64, rng: &mut SeededRng) -> PredicateResult {
    let mut tally = Tally::new(slack);
    for _ in 0..draws {
        let p = 1.0 + 7.0 * rng.uniform().max(1e-4);
        let t = rng.log_uniform(1e-3, 1e3);
        let quadratic = gamma_value(p, t, t);
        let tail = t.powf(p) + (0.5 * p - 1.0) * t.powf(p);
        let vscale = quadratic.abs().max(tail.abs()).max(1e-12);
        tally.le((quadratic - tail).abs(), 0.0, vscale);
        for sign in [-1.0, 1.0] {
            let d = gamma_derivative(p, t, sign * t);
            let want = sign * p * t.powf(p - 1.0);
            let dscale = d.abs().max(want.abs()).max(1e-12);
            tally.le((d - want).abs(), 0.0, dscale);
        }
    }
    tally.into_result("seam_continuity", draws)
}

/// With t ≥ 1, ‖ỹ − y‖₁ ≤ α, and θ = ‖y‖₁:
/// `Σ|γ_q(tᵢ, ỹᵢ) − γ_q(tᵢ, yᵢ)| ≤ 4nα(α + θ)`.
fn perturbation_bound(
    draws: usize,
    slack: f64,
    rng: &mut SeededRng,
) -> PredicateResult {
    let mut tally = Tally::new(slack);
    let n = 8;
    for _ in 0..draws {
        let q = 1.0 + rng.uniform().max(1e-4);
        let t: Vec<f64> = (0..n).map(|_| rng.log_uniform(1.0, 30.0)).collect();
        let y: Vec<f64> =
            (0..n).map(|_| signed_log_uniform(rng, 1e-3, 3.0)).collect();
        let theta: f64 = y.iter().map(|v| v.abs()).sum();
        let alpha = rng.log_uniform(1e-4, 1.0);
        let mut delta = rng.standard_normal_vec(n);
        let l1: f64 = delta.iter().map(|v| v.abs()).sum();
        for v in &mut delta {
            *v *= alpha / l1;
        }
        let lhs: f64 = (0..n)
            .map(|i| {
                (gamma_value(q, t[i], y[i] + delta[i]) - gamma_value(q, t[i], y[i]))
                    .abs()
            })
            .sum();
        let rhs = 4.0 * n as f64 * alpha * (alpha + theta);
        tally.le(lhs, rhs, rhs);
    }
    tally.into_result("perturbation_bound", draws)
}

/// With 1 ≤ tᵢ ≤ β: `Σγ_q(tᵢ, yᵢ) ≥ min{‖y‖₂²/(8β), ‖y‖_q^q/(8n)}`.
fn crude_lower_bound(
    draws: usize,
    slack: f64,
    rng: &mut SeededRng,
) -> PredicateResult {
    let mut tally = Tally::new(slack);
    let n = 8;
    for _ in 0..draws {
        let q = 1.0 + rng.uniform().max(1e-4);
        let beta = rng.log_uniform(1.0, 1e3);
        let t: Vec<f64> = (0..n).map(|_| 1.0 + (beta - 1.0) * rng.uniform()).collect();
        let y: Vec<f64> =
            (0..n).map(|_| signed_log_uniform(rng, 1e-3, 1e3)).collect();
        let total: f64 = (0..n).map(|i| gamma_value(q, t[i], y[i])).sum();
        let sq: f64 = y.iter().map(|v| v * v).sum();
        let qth: f64 = y.iter().map(|v| v.abs().powf(q)).sum();
        let bound = (sq / (8.0 * beta)).min(qth / (8.0 * n as f64));
        tally.le(bound, total, bound.max(total));
    }
    tally.into_result("crude_lower_bound", draws)
}

/// Runs every predicate at `draws` draws each with the given relative
/// slack, on independent deterministic substreams of `rng`.
#[must_use]
pub fn run_predicate_suite(
    draws: usize,
    slack: f64,
    rng: &mut SeededRng,
) -> Vec<PredicateResult> {
    let runners: [(&'static str, fn(usize, f64, &mut SeededRng) -> PredicateResult);
        7] = [
        ("power_sandwich", power_sandwich),
        ("scaling_envelope", scaling_envelope),
        ("homogeneity", homogeneity),
        ("two_sided_power_bound", two_sided_power_bound),
        ("seam_continuity", seam_continuity),
        ("perturbation_bound", perturbation_bound),
        ("crude_lower_bound", crude_lower_bound),
    ];
    runners
        .iter()
        .enumerate()
        .map(|(k, (_, run))| {
            let mut sub = rng.substream(k as u64);
            run(draws, slack, &mut sub)
        })
        .collect()
}
