//! Smooth and proximable function blocks.

mod prox;
mod smooth;
mod svd;

pub use prox::{LeastSquaresTerm, ProxBlock};
pub use smooth::SmoothBlock;
pub use svd::{jacobi_svd, Svd};

use thiserror::Error;

/// ∞-norm distance within which an indicator treats a point as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlockError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("prox step must be positive and finite, got {0}")]
    NonPositiveStep(f64),
    #[error("weight {index} must be a nonnegative finite number, got {value}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("box is empty at coordinate {index} (lo > hi)")]
    EmptyBox { index: usize },
    #[error("ball radius must be nonnegative, got {0}")]
    NegativeRadius(f64),
    #[error("hyperplane normal must be nonzero")]
    ZeroNormal,
    #[error("quadratic matrix is not symmetric")]
    NotSymmetric,
    #[error("weighted nuclear norm on {rows}x{cols} needs min(rows, cols) weights, got {weights}")]
    NuclearShape { rows: usize, cols: usize, weights: usize },
    #[error("invalid separable partition: {0}")]
    Partition(String),
    #[error("matrix has no entries")]
    EmptyMatrix,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("Jacobi SVD did not converge in {0} sweeps")]
    SvdNotConverged(usize),
    #[error("operator error: {0}")]
    Operator(String),
}
