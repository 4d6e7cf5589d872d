//! Multiplicative Chernoff tail bounds for sums of independent 0/1-bounded
//! variables, plus inverse helpers that turn a failure probability into the
//! count range it certifies. Used by sampling tests to decide how far an
//! observed row count may stray from its expectation before the run counts
//! as evidence of a bug rather than bad luck.

/// P[X ≥ (1+δ)μ] ≤ exp(−δ²μ / (2+δ)) for δ ≥ 0.
#[must_use]
pub fn upper_tail_bound(mu: f64, delta: f64) -> f64 {
    assert!(mu >= 0.0 && delta >= 0.0, "arguments must be nonnegative");
    (-delta * delta * mu / (2.0 + delta)).exp()
}

/// P[X ≤ (1−δ)μ] ≤ exp(−δ²μ / 2) for δ ∈ [0, 1].
#[must_use]
pub fn lower_tail_bound(mu: f64, delta: f64) -> f64 {
    assert!(mu >= 0.0, "mean must be nonnegative");
    assert!((0.0..=1.0).contains(&delta), "delta must lie in [0, 1]");
    (-delta * delta * mu / 2.0).exp()
}

/// Smallest count threshold `(1+δ)μ` whose upper tail bound is at most
/// `fail_prob`: observing more than this many successes happens with
/// probability ≤ `fail_prob`.
#[must_use]
pub fn count_upper_bound(mu: f64, fail_prob: f64) -> f64 {
    assert!(mu > 0.0, "mean must be positive");
    assert!((0.0..1.0).contains(&fail_prob) && fail_prob > 0.0);
    // upper_tail_bound is strictly decreasing in δ; bisect for the smallest
    // δ that drives it below fail_prob.
    let mut lo = 0.0f64;
    let mut hi = 2.0f64;
    while upper_tail_bound(mu, hi) > fail_prob {
        hi *= 2.0;
        assert!(hi < 1e12, "tail bound never reached {fail_prob}");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if upper_tail_bound(mu, mid) > fail_prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (1.0 + hi) * mu
}

/// Largest count threshold `(1−δ)μ` whose lower tail bound is at most
/// `fail_prob`; returns 0 when even δ = 1 cannot certify `fail_prob`
/// (a count of zero is then unsurprising).
#[must_use]
pub fn count_lower_bound(mu: f64, fail_prob: f64) -> f64 {
    assert!(mu > 0.0, "mean must be positive");
    assert!((0.0..1.0).contains(&fail_prob) && fail_prob > 0.0);
    if lower_tail_bound(mu, 1.0) > fail_prob {
        return 0.0;
    }
    let mut lo = 0.0f64; // bound too weak here
    let mut hi = 1.0f64; // bound strong enough here
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lower_tail_bound(mu, mid) > fail_prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (1.0 - hi) * mu
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_bounds_decrease_in_delta_and_mu() {
        assert!(upper_tail_bound(10.0, 0.5) > upper_tail_bound(10.0, 1.0));
        assert!(upper_tail_bound(10.0, 0.5) > upper_tail_bound(20.0, 0.5));
        assert!(lower_tail_bound(10.0, 0.3) > lower_tail_bound(10.0, 0.6));
        assert!(lower_tail_bound(10.0, 0.3) > lower_tail_bound(25.0, 0.3));
    }

    #[test]
    fn count_bounds_bracket_the_mean() {
        let mu = 400.0;
        let upper = count_upper_bound(mu, 1e-9);
        let lower = count_lower_bound(mu, 1e-9);
        assert!(lower < mu && mu < upper, "{lower} < {mu} < {upper}");
        // Inverting the bounds reproduces the failure probability.
        let delta_up = upper / mu - 1.0;
        assert!((upper_tail_bound(mu, delta_up) - 1e-9).abs() < 1e-12);
        let delta_lo = 1.0 - lower / mu;
        assert!((lower_tail_bound(mu, delta_lo) - 1e-9).abs() < 1e-12);
    }

    #[test]
    fn impossible_lower_certificate_returns_zero() {
        // Tiny mean: even a zero count is likely, so no positive lower
        // threshold can be certified at this failure probability.
        assert_eq!(count_lower_bound(0.5, 1e-6), 0.0);
    }

    #[test]
    fn wider_failure_budget_gives_tighter_brackets() {
        let mu = 100.0;
        let tight = count_upper_bound(mu, 1e-3);
        let loose = count_upper_bound(mu, 1e-12);
        assert!(tight < loose, "{tight} should sit below {loose}");
    }
}
