//! Iteratively reweighted outer loop for the budgeted smoothed subproblem.
//!
//! Each iteration solves the weighted step
//!
//! ```text
//! Δ* = argmin ΔᵀRΔ   s.t.  AᵀΔ = 0,  gᵀΔ = z,       rⱼ = (n^{1/p}tⱼ)^{p−2} + wⱼ^{p−2},
//! ```
//!
//! accepts it into the running average when `‖Δ*‖_p^p ≤ τ` (adding
//! `α·|Δ*|` to the weights), and otherwise boosts the resistances of the
//! large, low-resistance coordinates so the next step spreads its mass.
//! The inverse behind the weighted solves is maintained incrementally:
//! resistance increases are bucketed by relative size, buckets that fill on
//! their dyadic schedule trigger low-rank row updates, and a scheduled full
//! rebuild bounds the accumulated drift.

use gamma::gamma_total;
use linear_solvers::{ApplyInverse, LinearSolverError, MaintainedInverse};
use serde_json::json;
use sparse_core::DenseMatrix;

use crate::error::ResidualError;
use crate::problem::{ResidualConfig, ResidualParameters, ResidualProblem};
use crate::state::WeightState;
use crate::weighted::solve_weighted_lr;

/// Largest dimension the audit recorder accepts (snapshots are dense).
pub const AUDIT_DIMENSION_CAP: usize = 20;

/// One maintenance event: which iteration fired, the dyadic levels that
/// reached their thresholds, and how many coordinates were re-frozen.
#[derive(Debug, Clone)]
pub struct MaintenanceEvent {
    /// Iteration index (0-based) whose end triggered the event.
    pub iteration: usize,
    /// Dyadic levels whose counters fired.
    pub levels: Vec<u32>,
    /// Number of coordinates updated and re-frozen.
    pub rows: usize,
    /// Whether the low-rank update was refused and escalated to a rebuild.
    pub escalated: bool,
}

/// Per-iteration audit snapshot for offline comparison against a fresh
/// factorization.
#[derive(Debug, Clone)]
pub struct AuditRecord {
    /// Iteration index.
    pub iteration: usize,
    /// The maintained inverse materialized on the standard basis.
    pub maintained_inverse: DenseMatrix,
    /// Reference band `r̂` the maintained inverse targets.
    pub reference_band: Vec<f64>,
    /// Live band `r` at the end of the iteration.
    pub band: Vec<f64>,
    /// Error bound declared by the underlying factorization.
    pub error_bound: f64,
}

/// Audit data collected when [`ResidualConfig::audit`] is set.
#[derive(Debug, Clone, Default)]
pub struct ResidualAudit {
    /// One record per completed iteration.
    pub records: Vec<AuditRecord>,
    /// Whether every weight change was an increase.
    pub weights_monotone: bool,
    /// Largest accumulated per-level relative band change between freezes.
    pub max_level_drift: f64,
    /// Largest band ratio `max(r/r̂, r̂/r)` seen entering a weighted solve.
    pub band_max: f64,
}

/// Outcome of [`solve_residual`].
#[derive(Debug, Clone)]
pub struct ResidualOutcome {
    /// Average of the accepted steps (the best non-accepted step with
    /// [`Self::no_accepted_step`] raised when nothing was accepted).
    pub delta: Vec<f64>,
    /// Iterations actually run.
    pub iterations: usize,
    /// Number of accepted steps.
    pub accepted_steps: usize,
    /// Number of boost iterations.
    pub boosted_steps: usize,
    /// Scheduled and escalated full rebuilds performed.
    pub rebuilds: usize,
    /// Low-rank maintenance events.
    pub maintenance_events: Vec<MaintenanceEvent>,
    /// No step met the acceptance threshold within the budget.
    pub no_accepted_step: bool,
    /// The iteration reached a fixed point it could not leave (a boost
    /// that moved no coordinate) and stopped early.
    pub stalled: bool,
    /// One JSON line per iteration when tracing was requested.
    pub trace: Vec<String>,
    /// Audit snapshots when auditing was requested.
    pub audit: Option<ResidualAudit>,
    /// The derived parameters the run used.
    pub parameters: ResidualParameters,
}

/// Runs the reweighted outer loop on a normalized instance.
///
/// The caller is expected to have scaled the instance so the optimum is at
/// most 1 and every threshold lies in `[n^{−1/p}, 1]`; the threshold window
/// is asserted, the optimum bound cannot be and is the caller's contract.
///
/// # Errors
/// [`ResidualError::GradientInRowSpace`] when no feasible step can meet
/// the budget, and solver errors from the maintained factorization.
///
/// # Panics
/// Panics when thresholds leave `[n^{−1/p}, 1]` (beyond round-off), when
/// auditing is requested above [`AUDIT_DIMENSION_CAP`] columns, or on
/// dimension mismatches.
pub fn solve_residual(
    prob: &ResidualProblem,
    config: &ResidualConfig,
) -> Result<ResidualOutcome, ResidualError> {
    let n = prob.dimension();
    let d = prob.a.n_cols();
    let window_floor = (n as f64).powf(-1.0 / prob.p);
    assert!(
        prob.t.iter().all(|&ti| {
            ti >= window_floor * (1.0 - 1e-12) && ti <= 1.0 + 1e-12
        }),
        "thresholds must lie in [n^(-1/p), 1] = [{window_floor:.3e}, 1]"
    );
    if config.audit {
        assert!(
            d <= AUDIT_DIMENSION_CAP,
            "audit snapshots are dense; {d} columns exceed the cap {AUDIT_DIMENSION_CAP}"
        );
    }

    let params = ResidualParameters::derive(prob.p, n, config);
    let iterations = config.iteration_override.unwrap_or(params.iterations);

    if prob.z == 0.0 {
        // The zero step is exactly optimal for a zero budget.
        return Ok(ResidualOutcome {
            delta: vec![0.0; n],
            iterations: 0,
            accepted_steps: 0,
            boosted_steps: 0,
            rebuilds: 0,
            maintenance_events: Vec::new(),
            no_accepted_step: false,
            stalled: false,
            trace: Vec::new(),
            audit: config.audit.then(ResidualAudit::default),
            parameters: params,
        });
    }

    let mut state = WeightState::new(&prob.t, prob.p);
    let mut inv = MaintainedInverse::new(
        &prob.a,
        state.resistance(),
        Some(params.rebuild_period),
        1e-10,
    )?;

    let boost_factor = if prob.p > 2.0 {
        4f64.powf(1.0 / (prob.p - 2.0))
    } else {
        1.0 // unused: a quadratic instance that misses τ stalls instead
    };

    let mut sum_delta = vec![0.0; n];
    let mut accepted = 0usize;
    let mut boost_iterations = 0usize;
    let mut rebuilds = 0usize;
    let mut events: Vec<MaintenanceEvent> = Vec::new();
    let mut trace: Vec<String> = Vec::new();
    let mut audit = config.audit.then(|| ResidualAudit {
        weights_monotone: true,
        ..ResidualAudit::default()
    });
    let mut best_fallback: Option<(f64, Vec<f64>)> = None;
    let mut stalled = false;
    let mut ran = 0usize;

    for i in 0..iterations {
        ran = i + 1;
        let rebuilt = inv.rebuild_if_due(state.resistance())?;
        if rebuilt {
            state.on_rebuild();
            rebuilds += 1;
        }

        if let Some(a) = audit.as_mut() {
            a.band_max = a.band_max.max(inv.band_width(state.resistance()));
        }

        let sol = solve_weighted_lr(
            Some(&prob.a),
            state.resistance(),
            &prob.g,
            prob.z,
            Some(&inv),
            config.tol_c,
        )?;
        let step_power: f64 = sol
            .delta
            .iter()
            .map(|&di| di.abs().powf(prob.p))
            .sum();

        let accept = step_power <= params.tau;
        let mut boosted_coords = 0usize;
        if accept {
            accepted += 1;
            for (si, &di) in sum_delta.iter_mut().zip(&sol.delta) {
                *si += di;
            }
            state.apply_accept(params.alpha, &sol.delta);
        } else {
            boost_iterations += 1;
            if prob.p > 2.0 {
                boosted_coords = state.apply_boost(
                    params.rho,
                    params.beta,
                    boost_factor,
                    &sol.delta,
                );
            }
            if boosted_coords == 0 {
                // Nothing changed, so every later iteration would repeat
                // this exact solve: stop rather than spin.
                stalled = true;
            }
        }
        match &best_fallback {
            Some((best, _)) if *best <= step_power => {}
            _ => best_fallback = Some((step_power, sol.delta.clone())),
        }

        // End-of-iteration maintenance on the dyadic schedule.
        let (rows, levels) = state.maintenance_rows(i);
        if !rows.is_empty() {
            let r_new: Vec<f64> =
                rows.iter().map(|&j| state.resistance()[j]).collect();
            let escalated = match inv.update_rows(&rows, &r_new) {
                Ok(()) => false,
                Err(LinearSolverError::RebuildRequired { .. }) => {
                    inv.rebuild(state.resistance())?;
                    rebuilds += 1;
                    true
                }
                Err(other) => return Err(other.into()),
            };
            if escalated {
                state.on_rebuild();
            } else {
                state.freeze(&rows);
            }
            events.push(MaintenanceEvent {
                iteration: i,
                levels,
                rows: rows.len(),
                escalated,
            });
        }

        if config.collect_trace {
            let step = if accept {
                "accept"
            } else if stalled {
                "stall"
            } else {
                "boost"
            };
            trace.push(
                json!({
                    "iteration": i,
                    "objective": gamma_total(prob.p, &prob.t, &sol.delta),
                    "step": step,
                    "step_power": step_power,
                    "significant": rows.len(),
                    "boosted": boosted_coords,
                    "rebuild": rebuilt,
                    "accepted_total": accepted,
                })
                .to_string(),
            );
        }

        if let Some(a) = audit.as_mut() {
            a.records.push(AuditRecord {
                iteration: i,
                maintained_inverse: inv.apply_matrix(&DenseMatrix::identity(d)),
                reference_band: inv.reference_weights().to_vec(),
                band: state.resistance().to_vec(),
                error_bound: inv.base_error_bound(),
            });
            a.weights_monotone = state.weights_monotone();
            a.max_level_drift = state.max_drift();
        }

        if stalled {
            break;
        }
    }

    let (delta, no_accepted_step) = if accepted > 0 {
        let scale = 1.0 / accepted as f64;
        (sum_delta.iter().map(|&s| s * scale).collect(), false)
    } else {
        (
            best_fallback.map_or_else(|| vec![0.0; n], |(_, d)| d),
            true,
        )
    };

    Ok(ResidualOutcome {
        delta,
        iterations: ran,
        accepted_steps: accepted,
        boosted_steps: boost_iterations,
        rebuilds,
        maintenance_events: events,
        no_accepted_step,
        stalled,
        trace,
        audit,
        parameters: params,
    })
}
