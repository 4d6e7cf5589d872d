//! Dyadic threshold bucketing.
//!
//! Rows are grouped by their threshold into dyadic levels anchored at the
//! smallest threshold β = min tᵢ:
//!
//! ```text
//! T_j = { i : 2^{j−1}·β ≤ tᵢ < 2^j·β },   j = 1, 2, …, η
//! ```
//!
//! Every active row lands in exactly one level and the number of levels
//! is at most ⌈log₂(max t / min t)⌉ + 1. Within one level thresholds vary
//! by less than a factor of 2, so a level behaves like a constant-
//! threshold block.

/// The dyadic levels of a positive threshold vector.
#[derive(Debug, Clone)]
pub struct BucketedRows {
    /// Anchor β = min tᵢ.
    pub beta: f64,
    /// `buckets[j−1]` holds the positions (into the input slice) whose
    /// threshold lies in `[2^{j−1}β, 2^jβ)`. Levels may be empty.
    pub buckets: Vec<Vec<usize>>,
}

impl BucketedRows {
    /// Buckets `t` by dyadic level. Positions in the returned buckets
    /// index into `t`.
    ///
    /// # Panics
    /// Panics if `t` is empty or any threshold is not strictly positive
    /// and finite.
    #[must_use]
    pub fn build(t: &[f64]) -> Self {
        assert!(!t.is_empty(), "cannot bucket an empty threshold vector");
        let mut beta = f64::INFINITY;
        for (i, &ti) in t.iter().enumerate() {
            assert!(
                ti.is_finite() && ti > 0.0,
                "threshold {i} must be finite and > 0, got {ti}"
            );
            beta = beta.min(ti);
        }
        let mut buckets: Vec<Vec<usize>> = Vec::new();
        for (i, &ti) in t.iter().enumerate() {
            // 2^{j−1}β ≤ t < 2^jβ  ⇔  j − 1 = ⌊log₂(t/β)⌋.
            let level = (ti / beta).log2().floor().max(0.0) as usize;
            if buckets.len() <= level {
                buckets.resize_with(level + 1, Vec::new);
            }
            buckets[level].push(i);
        }
        Self { beta, buckets }
    }

    /// Number of dyadic levels (including empty interior levels).
    #[must_use]
    pub fn eta(&self) -> usize {
        self.buckets.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparse_core::SeededRng;

    #[test]
    fn levels_partition_the_input() {
        let mut rng = SeededRng::new(80, 0);
        for _ in 0..50 {
            let n = 1 + rng.index(64);
            let t: Vec<f64> = (0..n).map(|_| rng.log_uniform(1.0, 1e4)).collect();
            let b = BucketedRows::build(&t);
            let mut seen = vec![false; n];
            for bucket in &b.buckets {
                for &i in bucket {
                    assert!(!seen[i], "position {i} appears in two levels");
                    seen[i] = true;
                }
            }
            assert!(seen.iter().all(|&s| s), "some position missing from all levels");
        }
    }

    #[test]
    fn level_count_respects_the_dyadic_bound() {
        let mut rng = SeededRng::new(81, 0);
        for _ in 0..50 {
            let n = 2 + rng.index(64);
            let t: Vec<f64> = (0..n).map(|_| rng.log_uniform(1.0, 1e5)).collect();
            let b = BucketedRows::build(&t);
            let max = t.iter().cloned().fold(f64::MIN, f64::max);
            let bound = (max / b.beta).log2().ceil() as usize + 1;
            assert!(
                b.eta() <= bound,
                "{} levels exceeds bound {bound} for ratio {}",
                b.eta(),
                max / b.beta
            );
        }
    }

    #[test]
    fn members_sit_inside_their_dyadic_window() {
        let t = [1.0, 2.0, 4.0, 3.9, 1.99, 16.0];
        let b = BucketedRows::build(&t);
        assert_eq!(b.beta, 1.0);
        for (level, bucket) in b.buckets.iter().enumerate() {
            let lo = b.beta * (2.0f64).powi(level as i32);
            let hi = 2.0 * lo;
            for &i in bucket {
                assert!(
                    t[i] >= lo && t[i] < hi,
                    "t[{i}] = {} outside level-{level} window [{lo}, {hi})",
                    t[i]
                );
            }
        }
        // 16 = 2⁴·β needs level 5; level 3 (window [8,16)) stays empty.
        assert_eq!(b.eta(), 5);
        assert!(b.buckets[3].is_empty());
    }

    #[test]
    fn equal_thresholds_share_one_level() {
        let b = BucketedRows::build(&[3.0; 17]);
        assert_eq!(b.eta(), 1);
        assert_eq!(b.buckets[0].len(), 17);
    }

    #[test]
    #[should_panic(expected = "must be finite and > 0")]
    fn zero_threshold_is_rejected() {
        let _ = BucketedRows::build(&[1.0, 0.0]);
    }
}
