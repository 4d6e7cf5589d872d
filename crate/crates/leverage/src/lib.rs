//! Leverage scores, score-guided row sampling, spectral approximation,
//! and Lewis weights for sparse tall matrices.
//!
//! The row `aᵢ` of a matrix A has leverage score
//!
//! ```text
//! τᵢ(A) = aᵢᵀ (AᵀA)⁻¹ aᵢ ∈ [0, 1],    Σᵢ τᵢ = rank(A)
//! ```
//!
//! which measures how much the row matters to the Gram matrix. This crate
//! provides:
//!
//! - exact and generalized scores ([`leverage_scores_exact`],
//!   [`generalized_leverage_scores`]),
//! - sketched score overestimates against a sampled submatrix
//!   ([`estimate_leverage_jl`]),
//! - independent-keep row sampling driven by score overestimates
//!   ([`sample_rows`]),
//! - an iterative routine producing a weighted row subset Ã with
//!   `(1/4)·AᵀA ⪯ ÃᵀÃ ⪯ AᵀA` ([`spectral_approximation`]), and
//! - ℓ_p Lewis weights for `p > 2` ([`lewis_weights`]).

mod error;
mod jl;
mod lewis;
mod sampling;
mod scores;
mod spectral;

pub use error::LeverageError;
pub use jl::{
    algorithm_sketch_rows, estimate_leverage_jl, DETERMINISTIC_SKETCH_FACTOR,
};
pub use lewis::{lewis_weights, LewisWeights};
pub use sampling::{log_dimension, sample_rows, RowSample};
pub use scores::{
    generalized_leverage_scores, leverage_scores_exact, LeverageEstimate,
};
pub use spectral::{
    spectral_approximation, RoundLog, SpectralConfig, SpectralOutcome,
};
