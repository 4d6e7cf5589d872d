//! A smoothed-norm objective: an exponent paired with one threshold per
//! coordinate.

use crate::scalar::{gamma_total, gamma_value};

/// The objective `y ↦ Σᵢ γ_p(tᵢ, yᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaInstance {
    /// Exponent, strictly greater than 1.
    pub p: f64,
    /// Nonnegative per-coordinate thresholds.
    pub t: Vec<f64>,
}

impl GammaInstance {
    /// # Panics
    /// Panics if `p ≤ 1`, `p` is not finite, or any threshold is
    /// negative or not finite.
    #[must_use]
    pub fn new(p: f64, t: Vec<f64>) -> Self {
        assert!(p.is_finite() && p > 1.0, "exponent must be finite and > 1, got {p}");
        for (i, &ti) in t.iter().enumerate() {
            assert!(
                ti.is_finite() && ti >= 0.0,
                "threshold {i} must be finite and ≥ 0, got {ti}"
            );
        }
        Self { p, t }
    }

    /// Number of coordinates.
    #[must_use]
    pub fn len(&self) -> usize {
        self.t.len()
    }

    /// Whether the instance has no coordinates.
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Evaluates `Σᵢ γ_p(tᵢ, yᵢ)`.
    ///
    /// # Panics
    /// Panics if `y` has the wrong length.
    #[must_use]
    pub fn total(&self, y: &[f64]) -> f64 {
        gamma_total(self.p, &self.t, y)
    }

    /// Evaluates a single coordinate's contribution γ_p(tᵢ, yᵢ).
    ///
    /// # Panics
    /// Panics if `i` is out of range.
    #[must_use]
    pub fn coordinate(&self, i: usize, y_i: f64) -> f64 {
        gamma_value(self.p, self.t[i], y_i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_sums_the_coordinates() {
        let inst = GammaInstance::new(1.5, vec![1.0, 2.0, 0.5]);
        let y = [2.0, 1.0, -3.0];
        let by_hand: f64 = (0..3).map(|i| inst.coordinate(i, y[i])).sum();
        assert_eq!(inst.total(&y), by_hand);
        assert_eq!(inst.len(), 3);
        assert!(!inst.is_empty());
    }

    #[test]
    #[should_panic(expected = "exponent must be finite")]
    fn sub_unit_exponent_is_rejected() {
        let _ = GammaInstance::new(0.9, vec![1.0]);
    }

    #[test]
    #[should_panic(expected = "must be finite and ≥ 0")]
    fn negative_threshold_is_rejected() {
        let _ = GammaInstance::new(1.5, vec![1.0, -0.1]);
    }
}
