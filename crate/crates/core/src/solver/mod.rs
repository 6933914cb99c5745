//! The adaptive linearized ADMM iteration.
//!
//! One iteration picks a stepsize `γ⁺` and a dual direction `Δu`, then
//!
//! ```text
//! u⁺ = u + σ γ⁺ Δu
//! x⁺ = prox_{γ⁺ f1}(x − γ⁺ ∇f2(x) − γ⁺ Aᵀu⁺)
//! y⁺ = prox_{γ⁺ g1}(y − γ⁺ ∇g2(y) − γ⁺ Bᵀu⁺)
//! ```

mod cubic;
mod iterate;
mod problem;
mod step;

pub use cubic::{real_cubic_roots, smallest_positive_root, CubicError, DEGENERATE_RATIO, POSITIVE_ROOT_CUTOFF};
pub use iterate::{advance, solve, solve_observed, InitialPoint, SolveOutcome, SolverState};
pub use problem::ProblemInstance;
pub use step::{select_step, select_step_s1, select_step_s2, ActiveTerm, StepDecision, StepDiagnostics, GOLDEN_RATIO};

use thiserror::Error;

use crate::funcblocks::BlockError;
use crate::linops::LinOpError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("dimension mismatch ({what}): expected {expected}, got {actual}")]
    Dimension { what: &'static str, expected: usize, actual: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid option {name}: {reason}")]
    InvalidOption { name: &'static str, reason: String },
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    LinOp(#[from] LinOpError),
    #[error(transparent)]
    Cubic(#[from] CubicError),
}

/// Stepsize rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subroutine {
    /// Growth factor 3/2, extrapolation 2, closed-form primal caps.
    S1,
    /// Growth factor φ, extrapolation φ, cubic primal caps.
    S2,
    /// Constant `gamma0`, extrapolation 2. Not adaptive; used for comparisons.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub sigma: f64,
    pub gamma0: f64,
    pub epsilon: f64,
    pub subroutine: Subroutine,
    pub max_iters: usize,
    pub tol_two: f64,
    pub tol_inf: f64,
    /// Record the three descent-inequality slacks in every trace row.
    pub verify: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            gamma0: 1.0,
            epsilon: 0.0,
            subroutine: Subroutine::S1,
            max_iters: 100_000,
            tol_two: 1e-4,
            tol_inf: 1e-6,
            verify: false,
        }
    }
}

impl SolverOptions {
    /// The margin used when the convergence theory must apply:
    /// `min(1e-9, 1/(8σ))`.
    pub fn theory_epsilon(sigma: f64) -> f64 {
        1e-9f64.min(1.0 / (8.0 * sigma))
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |name, reason: String| Err(SolverError::InvalidOption { name, reason });
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return bad("sigma", format!("must be positive and finite, got {}", self.sigma));
        }
        if !(self.gamma0 > 0.0) || !self.gamma0.is_finite() {
            return bad("gamma0", format!("must be positive and finite, got {}", self.gamma0));
        }
        let eps_cap = 0.5f64.min(1.0 / (4.0 * self.sigma));
        if !(self.epsilon >= 0.0) || self.epsilon >= eps_cap {
            return bad("epsilon", format!("must lie in [0, {eps_cap}), got {}", self.epsilon));
        }
        if !(self.tol_two > 0.0) {
            return bad("tol_two", format!("must be positive, got {}", self.tol_two));
        }
        if !(self.tol_inf > 0.0) {
            return bad("tol_inf", format!("must be positive, got {}", self.tol_inf));
        }
        Ok(())
    }
}

/// Calls made to the problem's oracles.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub grad_f2: u64,
    pub grad_g2: u64,
    pub prox_f1: u64,
    pub prox_g1: u64,
    pub apply_a: u64,
    pub apply_b: u64,
    pub adjoint_a: u64,
    pub adjoint_b: u64,
}

impl OpCounters {
    pub fn grads(&self) -> u64 {
        self.grad_f2 + self.grad_g2
    }

    pub fn proxes(&self) -> u64 {
        self.prox_f1 + self.prox_g1
    }

    pub fn matvecs(&self) -> u64 {
        self.apply_a + self.apply_b + self.adjoint_a + self.adjoint_b
    }
}

impl std::ops::Sub for OpCounters {
    type Output = OpCounters;
    fn sub(self, o: OpCounters) -> OpCounters {
        OpCounters {
            grad_f2: self.grad_f2 - o.grad_f2,
            grad_g2: self.grad_g2 - o.grad_g2,
            prox_f1: self.prox_f1 - o.prox_f1,
            prox_g1: self.prox_g1 - o.prox_g1,
            apply_a: self.apply_a - o.apply_a,
            apply_b: self.apply_b - o.apply_b,
            adjoint_a: self.adjoint_a - o.adjoint_a,
            adjoint_b: self.adjoint_b - o.adjoint_b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    Diverged,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIters => "max_iters",
            SolveStatus::Diverged => "diverged",
        }
    }
}

/// Descent-inequality slacks of one step, each already reduced by `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slacks {
    pub x: f64,
    pub y: f64,
    pub u: f64,
}

impl Slacks {
    pub fn min(&self) -> f64 {
        self.x.min(self.y).min(self.u)
    }
}

/// One row of a solver trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Index of the iterate produced by this step.
    pub k: usize,
    pub gamma: f64,
    pub active_term: Option<ActiveTerm>,
    pub lam_a: Option<f64>,
    pub lam_b: Option<f64>,
    pub mu_a: Option<f64>,
    pub mu_b: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub residuals: crate::diagnostics::ResidualNorms,
    pub slacks: Option<Slacks>,
    pub ops: OpCounters,
    pub wall_ns: u128,
}
