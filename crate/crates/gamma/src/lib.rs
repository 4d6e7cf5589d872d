//! The quadratically smoothed p-norm, its analytic toolkit, and
//! threshold-bucketed row sampling.
//!
//! The scalar function
//!
//! ```text
//! γ_p(t, x) = (p/2)·t^{p−2}·x²        if |x| ≤ t
//!           = |x|^p + (p/2 − 1)·t^p   otherwise
//! ```
//!
//! interpolates between a quadratic near the origin and |x|^p in the
//! tails while staying C¹. This crate provides the scalar function and
//! its derivatives ([`gamma_value`], [`gamma_derivative`],
//! [`gamma_second_derivative`]), the box-clamped quadratic extension
//! ([`quadratic_extension`]), vector objectives ([`GammaInstance`]),
//! dyadic threshold bucketing ([`BucketedRows`]), the iterative
//! square-root-leverage sampler ([`gamma_sample`]) with its Monte-Carlo
//! verifier ([`gamma_preservation_report`]), and a randomized predicate
//! suite for the function's analytic properties
//! ([`run_predicate_suite`]).

mod bucket;
mod instance;
mod predicates;
mod report;
mod sample;
mod scalar;

pub use bucket::BucketedRows;
pub use instance::GammaInstance;
pub use predicates::{run_predicate_suite, PredicateResult};
pub use report::{gamma_preservation_report, PreservationReport, NORM_RANGE_CLAMP};
pub use sample::{
    default_oversampling, gamma_sample, weighted_gamma_total, GammaSample,
    SampleRound, DEFAULT_OVERSAMPLING_CONSTANT,
};
pub use scalar::{
    gamma_derivative, gamma_second_derivative, gamma_total, gamma_value,
    quadratic_extension, sandwich_lower_coefficient,
    sandwich_upper_coefficient,
};
