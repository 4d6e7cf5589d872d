//! Conformance of the reweighted solver against dense references: the
//! returned step must be within a constant factor of the true constrained
//! minimum, and the incrementally maintained inverse must track a freshly
//! factorized one within its declared error bound at every iteration.

use gamma::gamma_total;
use oracle::dense::{dense_to_dmatrix, pseudo_inverse, spectral_norm};
use oracle::gamma_constrained_min;
use residual::{solve_residual, ResidualConfig, ResidualProblem};
use sparse_core::{SeededRng, SparseMatrix};

fn random_sparse(n: usize, d: usize, rng: &mut SeededRng) -> SparseMatrix {
    let mut triplets = Vec::new();
    for i in 0..n {
        for j in 0..d {
            triplets.push((i, j, rng.standard_normal()));
        }
    }
    SparseMatrix::from_triplets(n, d, &triplets).expect("valid triplets")
}

fn normalized_instance(
    n: usize,
    d: usize,
    p: f64,
    z: f64,
    seed: u64,
) -> ResidualProblem {
    let mut rng = SeededRng::new(seed, 0);
    let a = random_sparse(n, d, &mut rng);
    let floor = (n as f64).powf(-1.0 / p);
    let t: Vec<f64> = (0..n)
        .map(|_| rng.uniform_range(floor.min(0.999), 1.0))
        .collect();
    let g: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    ResidualProblem::new(a, g, t, z, p)
}

#[test]
fn step_stays_within_a_constant_factor_of_the_reference_optimum() {
    for (seed, p) in [(61u64, 2.5f64), (62, 4.0), (63, 8.0)] {
        let prob = normalized_instance(24, 4, p, 0.05, seed);
        let reference = gamma_constrained_min(
            prob.p,
            &prob.t,
            Some(&prob.a),
            &prob.g,
            prob.z,
            1e-11,
        )
        .expect("dense reference");
        assert!(
            reference.objective <= 1.0,
            "instance not normalized: reference optimum {}",
            reference.objective
        );
        let outcome =
            solve_residual(&prob, &ResidualConfig::default()).expect("solve");
        assert!(
            outcome.accepted_steps > 0,
            "p = {p}: the normalized budget must accept at least one step"
        );
        let value = gamma_total(prob.p, &prob.t, &outcome.delta);
        assert!(
            value <= 32.0 * reference.objective + 1e-9,
            "p = {p}: smoothed value {value} vs reference {} exceeds the \
             32x conformance envelope",
            reference.objective
        );
        // Constraint quality of the averaged step.
        let mut at_delta = vec![0.0; prob.a.n_cols()];
        prob.a.mul_vec_t(&outcome.delta, &mut at_delta);
        let violation = at_delta.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        let dinf = outcome.delta.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        assert!(violation <= 1e-8 * dinf.max(1.0), "kernel violation {violation}");
        let budget: f64 = prob
            .g
            .iter()
            .zip(&outcome.delta)
            .map(|(&x, &y)| x * y)
            .sum();
        assert!(
            (budget - prob.z).abs() <= 1e-8 * prob.z.abs(),
            "budget {budget} vs {}",
            prob.z
        );
    }
}

#[test]
fn maintained_inverse_tracks_a_fresh_factorization_throughout() {
    let prob = normalized_instance(60, 12, 4.0, 0.08, 64);
    let config = ResidualConfig {
        audit: true,
        iteration_override: Some(40),
        collect_trace: false,
        ..ResidualConfig::default()
    };
    let outcome = solve_residual(&prob, &config).expect("audited run");
    let audit = outcome.audit.expect("audit requested");
    assert_eq!(audit.records.len(), outcome.iterations);
    for record in &audit.records {
        // Fresh inverse of Aᵀ diag(1/r̂) A at the maintained reference band.
        let w: Vec<f64> = record.reference_band.iter().map(|&ri| 1.0 / ri).collect();
        let gram = prob.a.weighted_gram_dense(&w);
        let fresh = pseudo_inverse(&dense_to_dmatrix(&gram), 1e-14);
        let maintained = dense_to_dmatrix(&record.maintained_inverse);
        let denom = spectral_norm(&fresh).max(f64::MIN_POSITIVE);
        let err = spectral_norm(&(&maintained - &fresh)) / denom;
        let allowed = 10.0 * record.error_bound;
        assert!(
            err <= allowed,
            "iteration {}: maintained inverse drifts {err:.3e} from fresh, \
             allowed {allowed:.3e}",
            record.iteration
        );
    }
    assert!(audit.weights_monotone);
    assert!(
        audit.max_level_drift <= 4.0 + 1e-9,
        "drift accounting bound breached: {}",
        audit.max_level_drift
    );
}

#[test]
fn boost_only_runs_still_respect_constraints_on_the_fallback_step() {
    // An oversized budget forces every candidate step far past the
    // acceptance threshold, so the run ends with nothing accepted; the
    // fallback (best miss) must still satisfy both constraints.
    let prob = normalized_instance(30, 5, 4.0, 50.0, 65);
    let config = ResidualConfig::default();
    let outcome = solve_residual(&prob, &config).expect("runs to stall or cap");
    assert!(outcome.no_accepted_step);
    let mut at_delta = vec![0.0; prob.a.n_cols()];
    prob.a.mul_vec_t(&outcome.delta, &mut at_delta);
    let violation = at_delta.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let dinf = outcome.delta.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    assert!(violation <= 1e-8 * dinf.max(1.0));
    let budget: f64 = prob
        .g
        .iter()
        .zip(&outcome.delta)
        .map(|(&x, &y)| x * y)
        .sum();
    assert!((budget - prob.z).abs() <= 1e-8 * prob.z.abs());
}
