//! Adaptive linearized ADMM for
//!
//! ```text
//! minimize  f1(x) + f2(x) + g1(y) + g2(y)   subject to  Ax + By = c
//! ```
//!
//! where `f1`, `g1` are accessed through proximal maps and `f2`, `g2` through
//! gradients. Stepsizes come from closed-form rules built out of quantities
//! the iteration already computes, so no linesearch or operator norm is
//! needed. The crate also ships two fixed-step baselines, KKT residuals,
//! Lyapunov and inequality-slack checks, benchmark problem builders and a
//! LIBSVM parser.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod dense;
pub mod diagnostics;
pub mod funcblocks;
pub mod linops;
pub mod problems;
pub mod rng;
pub mod solver;

pub use dense::Matrix;
pub use funcblocks::{ProxBlock, SmoothBlock};
pub use linops::LinOp;
pub use solver::{ProblemInstance, SolverOptions, Subroutine};
