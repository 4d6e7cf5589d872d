//! Finite-difference gradients with Richardson extrapolation, used to check
//! analytic derivatives elsewhere in the workspace.

/// Output of [`finite_difference`].
#[derive(Debug, Clone)]
pub struct FdGradient {
    /// Extrapolated central-difference gradient.
    pub gradient: Vec<f64>,
    /// Max-norm difference between the extrapolated gradient and the raw
    /// half-step estimate; a practical bound on the truncation error.
    pub error_estimate: f64,
}

/// Estimates ∇f(x) by central differences at steps `h0` and `h0/2`, combined
/// with one Richardson extrapolation step per coordinate:
///
/// ```text
/// D(h)  = (f(x + h·eᵢ) − f(x − h·eᵢ)) / (2h)        (error O(h²))
/// Dᵢ    = (4·D(h/2) − D(h)) / 3                     (error O(h⁴))
/// ```
///
/// # Panics
/// Panics if `h0` is not a positive finite number or `x` is empty.
///
/// # Example
/// ```
/// use oracle::finite_difference;
/// let fd = finite_difference(|x| x[0] * x[0] * x[0], &[2.0], 1e-4);
/// assert!((fd.gradient[0] - 12.0).abs() < 1e-8);
/// ```
pub fn finite_difference<F>(mut f: F, x: &[f64], h0: f64) -> FdGradient
where
    F: FnMut(&[f64]) -> f64,
{
    assert!(h0.is_finite() && h0 > 0.0, "step must be positive, got {h0}");
    assert!(!x.is_empty(), "cannot differentiate a zero-dimensional function");
    let mut work = x.to_vec();
    let mut gradient = Vec::with_capacity(x.len());
    let mut error_estimate = 0.0f64;
    for i in 0..x.len() {
        let mut central = |h: f64| -> f64 {
            work[i] = x[i] + h;
            let up = f(&work);
            work[i] = x[i] - h;
            let down = f(&work);
            work[i] = x[i];
            (up - down) / (2.0 * h)
        };
        let d_full = central(h0);
        let d_half = central(0.5 * h0);
        let extrapolated = (4.0 * d_half - d_full) / 3.0;
        error_estimate = error_estimate.max((extrapolated - d_half).abs());
        gradient.push(extrapolated);
    }
    FdGradient {
        gradient,
        error_estimate,
    }
}
