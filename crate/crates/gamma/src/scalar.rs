//! The quadratically smoothed p-norm for scalars, its derivatives, and
//! its clamped quadratic extension.
//!
//! For `p > 1` and threshold `t ≥ 0`,
//!
//! ```text
//! γ_p(t, x) = (p/2)·t^{p−2}·x²           if |x| ≤ t
//!           = |x|^p + (p/2 − 1)·t^p      otherwise
//! ```
//!
//! behaves like a quadratic near the origin and like |x|^p in the tails,
//! and is C¹ in x with both branches meeting at |x| = t. At t = 0 it
//! degenerates to |x|^p exactly.

/// Evaluates γ_p(t, x).
///
/// # Panics
/// Panics if `p ≤ 1`, `t < 0`, or either is not finite.
#[must_use]
pub fn gamma_value(p: f64, t: f64, x: f64) -> f64 {
    check_parameters(p, t);
    let ax = x.abs();
    if ax <= t {
        if ax == 0.0 {
            // Avoids 0·∞ when t = 0 and p < 2.
            return 0.0;
        }
        0.5 * p * t.powf(p - 2.0) * x * x
    } else {
        // t = 0 lands here for every x ≠ 0 and yields |x|^p.
        ax.powf(p) + (0.5 * p - 1.0) * t.powf(p)
    }
}

/// Evaluates dγ_p(t, x)/dx. Continuous across |x| = t, where both
/// branches give p·t^{p−1}·sign(x).
///
/// # Panics
/// Panics if `p ≤ 1`, `t < 0`, or either is not finite.
#[must_use]
pub fn gamma_derivative(p: f64, t: f64, x: f64) -> f64 {
    check_parameters(p, t);
    let ax = x.abs();
    if ax <= t {
        if ax == 0.0 {
            return 0.0;
        }
        p * t.powf(p - 2.0) * x
    } else {
        p * x.signum() * ax.powf(p - 1.0)
    }
}

/// Evaluates d²γ_p(t, x)/dx²: p·t^{p−2} inside the quadratic cap,
/// p(p−1)·|x|^{p−2} outside. Unbounded at the origin when t = 0 and
/// p < 2, mirroring |x|^p itself.
///
/// # Panics
/// Panics if `p ≤ 1`, `t < 0`, or either is not finite.
#[must_use]
pub fn gamma_second_derivative(p: f64, t: f64, x: f64) -> f64 {
    check_parameters(p, t);
    let ax = x.abs();
    if ax <= t {
        // IEEE semantics handle t = 0 (then x = 0): 0^neg = ∞, 0^0 = 1.
        p * t.powf(p - 2.0)
    } else {
        p * (p - 1.0) * ax.powf(p - 2.0)
    }
}

/// Sums γ_p over paired thresholds and coordinates.
///
/// # Panics
/// Panics if the slices differ in length or any entry violates the
/// scalar contract.
#[must_use]
pub fn gamma_total(p: f64, t: &[f64], y: &[f64]) -> f64 {
    assert_eq!(t.len(), y.len(), "threshold/coordinate length mismatch");
    t.iter().zip(y).map(|(&ti, &yi)| gamma_value(p, ti, yi)).sum()
}

/// The lower envelope coefficient `(p − 1)/(p·2^p)` in the two-sided bound
///
/// ```text
/// |t|^p + l·y + c_lower(p)·γ_p(|t|, y) ≤ |t + y|^p ≤ |t|^p + l·y + 2^p·γ_p(|t|, y)
/// ```
///
/// where `l = p·|t|^{p−2}·t`. Objectives built from the lower envelope use
/// this coefficient to weight the smoothed penalty against the linear term.
///
/// # Panics
/// Panics if `p ≤ 1` or `p` is not finite.
#[must_use]
pub fn sandwich_lower_coefficient(p: f64) -> f64 {
    assert!(p.is_finite() && p > 1.0, "exponent must exceed 1, got {p}");
    (p - 1.0) / (p * (2.0f64).powf(p))
}

/// The upper envelope coefficient `2^p` paired with
/// [`sandwich_lower_coefficient`].
///
/// # Panics
/// Panics if `p ≤ 1` or `p` is not finite.
#[must_use]
pub fn sandwich_upper_coefficient(p: f64) -> f64 {
    assert!(p.is_finite() && p > 1.0, "exponent must exceed 1, got {p}");
    (2.0f64).powf(p)
}

/// Evaluates the quadratic extension of γ_p(t, ·) outside the box
/// `[l, u]`: inside the box it equals γ_p(t, s); beyond either end it
/// continues as the second-order Taylor polynomial anchored at the clamp
/// point, so value and first derivative stay continuous and the curvature
/// outside is frozen at the clamp's γ''. Returns `(value, derivative)`.
///
/// # Panics
/// Panics if `l > u` or the scalar contract is violated.
#[must_use]
pub fn quadratic_extension(p: f64, t: f64, l: f64, u: f64, s: f64) -> (f64, f64) {
    assert!(l <= u, "lower clamp {l} exceeds upper clamp {u}");
    if s > u {
        taylor_tail(p, t, u, s)
    } else if s < l {
        taylor_tail(p, t, l, s)
    } else {
        (gamma_value(p, t, s), gamma_derivative(p, t, s))
    }
}

/// Second-order Taylor continuation of γ_p(t, ·) from anchor `a` to `s`.
fn taylor_tail(p: f64, t: f64, a: f64, s: f64) -> (f64, f64) {
    let v = gamma_value(p, t, a);
    let d1 = gamma_derivative(p, t, a);
    let d2 = gamma_second_derivative(p, t, a);
    let step = s - a;
    (
        v + d1 * step + 0.5 * d2 * step * step,
        d1 + d2 * step,
    )
}

fn check_parameters(p: f64, t: f64) {
    assert!(p.is_finite() && p > 1.0, "exponent must be finite and > 1, got {p}");
    assert!(t.is_finite() && t >= 0.0, "threshold must be finite and ≥ 0, got {t}");
}
