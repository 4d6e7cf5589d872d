//! Monotone weight state with change accounting.
//!
//! Each coordinate carries a weight `wⱼ ≥ 0` and a resistance
//!
//! ```text
//! rⱼ = (n^{1/p}·tⱼ)^{p−2} + wⱼ^{p−2}        (the wⱼ term is omitted at wⱼ = 0),
//! ```
//!
//! together with a frozen reference `r̂ⱼ` mirroring the band the maintained
//! inverse was last told about. Every resistance increase is classified by
//! its relative size against the reference: the change lands in the least
//! dyadic level `η ≥ 0` with `2^{−η} ≤ (r_new − r_old)/r̂ⱼ`, and a level-η
//! counter reaching `2^η` marks the coordinate for maintenance at the next
//! iteration index divisible by `2^η`. Between freezes the accumulated
//! relative change per level is then at most `2^{−η+1} · 2^η · 2 = 4`, which
//! bounds how far the live band can drift from the reference.

/// Deepest tracked dyadic level; relative changes below `2^{−63}` are
/// dropped (they cannot reach a counter threshold in any feasible run).
pub const MAX_LEVEL: u32 = 63;

/// Least `η ≥ 0` with `2^{−η} ≤ ratio`; `None` for ratios too small to
/// track (below `2^{−MAX_LEVEL}`).
#[must_use]
pub(crate) fn level_for(ratio: f64) -> Option<u32> {
    if ratio >= 1.0 {
        return Some(0);
    }
    if !(ratio > 0.0) || ratio < (0.5f64).powi(MAX_LEVEL as i32) {
        return None;
    }
    let mut eta = (-ratio.log2()).ceil().max(0.0) as u32;
    // Round-off guards: keep the least level whose scale is ≤ ratio.
    while eta > 0 && (0.5f64).powi(eta as i32 - 1) <= ratio {
        eta -= 1;
    }
    while (0.5f64).powi(eta as i32) > ratio {
        eta += 1;
    }
    Some(eta)
}

/// Weight, resistance, and maintenance-counter state for one run.
#[derive(Debug, Clone)]
pub struct WeightState {
    p: f64,
    /// `n^{1/p}`, the threshold prefactor and the boost floor.
    scale: f64,
    /// Fixed part `(n^{1/p}·tⱼ)^{p−2}` of each resistance.
    base: Vec<f64>,
    w: Vec<f64>,
    r: Vec<f64>,
    r_hat: Vec<f64>,
    /// Per-coordinate, per-level counts of registered changes.
    counters: Vec<Vec<u64>>,
    /// Per-coordinate, per-level accumulated relative change since the
    /// last freeze (the quantity the ≤ 4 drift bound speaks about).
    drift: Vec<Vec<f64>>,
    /// Largest per-level accumulated relative change ever observed.
    max_drift_seen: f64,
    /// False if any registered change was negative (weights are meant to
    /// be monotone, so this flags a contract breach).
    monotone: bool,
}

impl WeightState {
    /// Initializes zero weights against the thresholds `t`.
    ///
    /// # Panics
    /// Panics when `p < 2`, `t` is empty, or a threshold is not strictly
    /// positive (the resistance floor needs `tⱼ > 0`).
    #[must_use]
    pub fn new(t: &[f64], p: f64) -> Self {
        assert!(p >= 2.0, "exponent must be ≥ 2, got {p}");
        assert!(!t.is_empty(), "at least one coordinate required");
        assert!(
            t.iter().all(|&ti| ti > 0.0 && ti.is_finite()),
            "thresholds must be positive and finite"
        );
        let n = t.len();
        let scale = (n as f64).powf(1.0 / p);
        let base: Vec<f64> = t.iter().map(|&ti| (scale * ti).powf(p - 2.0)).collect();
        let r = base.clone();
        Self {
            p,
            scale,
            base,
            w: vec![0.0; n],
            r: r.clone(),
            r_hat: r,
            counters: vec![Vec::new(); n],
            drift: vec![Vec::new(); n],
            max_drift_seen: 0.0,
            monotone: true,
        }
    }

    /// Current resistances.
    #[must_use]
    pub fn resistance(&self) -> &[f64] {
        &self.r
    }

    /// Current weights.
    #[must_use]
    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Frozen reference band.
    #[must_use]
    pub fn reference(&self) -> &[f64] {
        &self.r_hat
    }

    /// The boost floor `n^{1/p}`.
    #[must_use]
    pub fn floor(&self) -> f64 {
        self.scale
    }

    /// Largest per-level accumulated relative change seen so far.
    #[must_use]
    pub fn max_drift(&self) -> f64 {
        self.max_drift_seen
    }

    /// Whether every registered change was an increase.
    #[must_use]
    pub fn weights_monotone(&self) -> bool {
        self.monotone
    }

    /// Resistance implied by the current weight of coordinate `j`.
    fn resistance_of(&self, j: usize) -> f64 {
        let wj = self.w[j];
        if wj == 0.0 {
            self.base[j]
        } else {
            self.base[j] + wj.powf(self.p - 2.0)
        }
    }

    /// Registers the move of coordinate `j` to its recomputed resistance.
    fn register(&mut self, j: usize) {
        let r_new = self.resistance_of(j);
        let delta = r_new - self.r[j];
        if delta == 0.0 {
            return;
        }
        if delta < 0.0 {
            self.monotone = false;
            self.r[j] = r_new;
            return;
        }
        if let Some(level) = level_for(delta / self.r_hat[j]) {
            let level = level as usize;
            if self.counters[j].len() <= level {
                self.counters[j].resize(level + 1, 0);
                self.drift[j].resize(level + 1, 0.0);
            }
            self.counters[j][level] += 1;
            self.drift[j][level] += delta / self.r_hat[j];
            self.max_drift_seen = self.max_drift_seen.max(self.drift[j][level]);
        }
        self.r[j] = r_new;
    }

    /// Accepted step: `w ← w + α·|Δ|`, resistances recomputed and changes
    /// registered. Returns how many coordinates moved.
    pub fn apply_accept(&mut self, alpha: f64, delta: &[f64]) -> usize {
        assert_eq!(delta.len(), self.w.len(), "step length mismatch");
        assert!(alpha > 0.0, "step size must be positive");
        let mut moved = 0;
        for j in 0..self.w.len() {
            let add = alpha * delta[j].abs();
            if add > 0.0 {
                self.w[j] += add;
                self.register(j);
                moved += 1;
            }
        }
        moved
    }

    /// Boost step: coordinates with `|Δⱼ| ≥ rho` *and* `rⱼ ≤ beta` jump to
    /// `factor · max(n^{1/p}, wⱼ)`. Returns how many were boosted.
    pub fn apply_boost(
        &mut self,
        rho: f64,
        beta: f64,
        factor: f64,
        delta: &[f64],
    ) -> usize {
        assert_eq!(delta.len(), self.w.len(), "step length mismatch");
        assert!(factor >= 1.0 && factor.is_finite(), "boost factor must be ≥ 1");
        let mut boosted = 0;
        for j in 0..self.w.len() {
            if delta[j].abs() >= rho && self.r[j] <= beta {
                let target = factor * self.scale.max(self.w[j]);
                if target > self.w[j] {
                    self.w[j] = target;
                    self.register(j);
                }
                boosted += 1;
            }
        }
        boosted
    }

    /// The maintenance set after iteration `i`: levels `η` with
    /// `2^η | (i+1)` are eligible, and a coordinate joins when any eligible
    /// level's counter has reached `2^η`. Returns the sorted coordinate set
    /// and the eligible levels that actually fired.
    #[must_use]
    pub fn maintenance_rows(&self, i: usize) -> (Vec<usize>, Vec<u32>) {
        let stamp = i + 1;
        let deepest = (stamp.trailing_zeros()).min(MAX_LEVEL);
        let mut rows = Vec::new();
        let mut fired = Vec::new();
        for (j, counts) in self.counters.iter().enumerate() {
            let mut hit = false;
            for eta in 0..=deepest {
                let idx = eta as usize;
                if idx < counts.len() && counts[idx] >= (1u64 << eta) {
                    hit = true;
                    if !fired.contains(&eta) {
                        fired.push(eta);
                    }
                }
            }
            if hit {
                rows.push(j);
            }
        }
        fired.sort_unstable();
        (rows, fired)
    }

    /// Freezes the listed coordinates: the reference band moves to the live
    /// band and all their counters and drift accumulators clear.
    pub fn freeze(&mut self, rows: &[usize]) {
        for &j in rows {
            self.r_hat[j] = self.r[j];
            self.counters[j].clear();
            self.drift[j].clear();
        }
    }

    /// Full-rebuild bookkeeping: every coordinate freezes.
    pub fn on_rebuild(&mut self) {
        for j in 0..self.r.len() {
            self.r_hat[j] = self.r[j];
            self.counters[j].clear();
            self.drift[j].clear();
        }
    }

    /// Count of coordinates with any outstanding registered change.
    #[must_use]
    pub fn outstanding(&self) -> usize {
        self.counters.iter().filter(|c| c.iter().any(|&k| k > 0)).count()
    }
}
