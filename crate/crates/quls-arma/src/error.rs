//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by distribution, model and estimation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The series is too short for the requested model.
    #[error("insufficient data: need more than {min} observations, got {len}")]
    InsufficientData { min: usize, len: usize },

    /// The regression design matrix is rank deficient.
    #[error("singular design matrix (rank {rank} < {cols} columns)")]
    SingularDesign { rank: usize, cols: usize },

    /// A log-likelihood contribution overflowed or became undefined.
    #[error("non-finite log-likelihood contribution at t = {t}")]
    NonFiniteLogLik { t: usize },

    /// The linked-quantile recursion overflowed during data generation.
    #[error("series generation overflowed at t = {t}")]
    Generation { t: usize },

    /// A finite-difference Hessian violated symmetry beyond tolerance.
    #[error("hessian asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.3e}")]
    AsymmetricHessian { asymmetry: f64, tolerance: f64 },

    /// Every candidate fit on the degrees-of-freedom grid failed.
    #[error("all degrees-of-freedom grid fits failed: {}", format_grid_failures(.outcomes))]
    NuGridFailed { outcomes: Vec<(f64, String)> },

    /// Every Monte Carlo replication failed to produce an estimate.
    #[error("all {total} Monte Carlo replications failed")]
    AllReplicationsFailed { total: usize },

    /// The effective sample size cannot support the parameter count.
    #[error("degenerate sample: effective size {n_eff} must exceed dimension {dim}")]
    DegenerateSample { n_eff: usize, dim: usize },

    /// Malformed input (missing columns, bad values, empty series, ...).
    #[error("invalid input: {0}")]
    Input(String),
}

fn format_grid_failures(outcomes: &[(f64, String)]) -> String {
    outcomes
        .iter()
        .map(|(nu, msg)| format!("nu={nu}: {msg}"))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
