//! Residuals, stopping rule, Lyapunov witnesses, inequality slacks and
//! independent oracles used to check the solver.

mod audit;
mod reference;

pub use audit::{audit_run, RunAudit, RESOLVED_DIFFERENCE};
pub use reference::{proximal_gradient, proximal_gradient_solve, reference_solve, REFERENCE_DIM_CAP};

use thiserror::Error;

use crate::dense::{self, dot, norm2, norm2_sq, norm_inf};
use crate::funcblocks::{BlockError, SmoothBlock};
use crate::linops::LinOpError;
use crate::solver::{
    ProblemInstance, Slacks, SolverError, SolverState, StepDecision, Subroutine, GOLDEN_RATIO,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("dimension mismatch ({what}): expected {expected}, got {actual}")]
    Dimension { what: &'static str, expected: usize, actual: usize },
    #[error("a Lyapunov value needs a previous iterate (k >= 1), got k = {0}")]
    NoPreviousIterate(usize),
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
    #[error("problem too large for the reference solver: {dim} > {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("reference solver did not converge in {iters} iterations (residual {residual:e})")]
    NotConverged { iters: usize, residual: f64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    LinOp(#[from] LinOpError),
}

/// The four residual norms, without the vectors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualNorms {
    pub two_norm_w12: f64,
    pub two_norm_w3: f64,
    pub inf_norm_w12: f64,
    pub inf_norm_w3: f64,
}

impl ResidualNorms {
    pub fn max_two(&self) -> f64 {
        self.two_norm_w12.max(self.two_norm_w3)
    }

    pub fn max_inf(&self) -> f64 {
        self.inf_norm_w12.max(self.inf_norm_w3)
    }

    pub fn is_finite(&self) -> bool {
        self.two_norm_w12.is_finite()
            && self.two_norm_w3.is_finite()
            && self.inf_norm_w12.is_finite()
            && self.inf_norm_w3.is_finite()
    }

    pub fn passes(&self, tol_two: f64, tol_inf: f64) -> bool {
        self.max_two() <= tol_two && self.max_inf() <= tol_inf
    }
}

/// Dual residuals `w1`, `w2` (elements of the subdifferentials of the
/// Lagrangian in `x` and `y`) and the primal residual `w3`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub w3: Vec<f64>,
    pub two_norm_w12: f64,
    pub two_norm_w3: f64,
    pub inf_norm_w12: f64,
    pub inf_norm_w3: f64,
}

impl ResidualReport {
    pub fn from_vectors(w1: Vec<f64>, w2: Vec<f64>, w3: Vec<f64>) -> Self {
        let two_norm_w12 = (norm2_sq(&w1) + norm2_sq(&w2)).sqrt();
        let two_norm_w3 = norm2(&w3);
        let inf_norm_w12 = norm_inf(&w1).max(norm_inf(&w2));
        let inf_norm_w3 = norm_inf(&w3);
        Self { w1, w2, w3, two_norm_w12, two_norm_w3, inf_norm_w12, inf_norm_w3 }
    }

    pub fn norms(&self) -> ResidualNorms {
        ResidualNorms {
            two_norm_w12: self.two_norm_w12,
            two_norm_w3: self.two_norm_w3,
            inf_norm_w12: self.inf_norm_w12,
            inf_norm_w3: self.inf_norm_w3,
        }
    }
}

/// Residuals of the step `prev → next` taken with stepsize `gamma_next`.
///
/// The `Aᵀu⁺` terms cancel, so `w1 = (x − x⁺)/γ⁺ − ∇f2(x) + ∇f2(x⁺)`.
/// Gradients and `Ax⁺`, `By⁺` come from the states' caches.
pub fn kkt_residuals(
    prev: &SolverState,
    next: &SolverState,
    gamma_next: f64,
    problem: &ProblemInstance,
) -> Result<ResidualReport, SolverError> {
    let (p, q, r) = problem.dims();
    for (what, expected, actual) in [
        ("prev x", p, prev.x_cur.len()),
        ("next x", p, next.x_cur.len()),
        ("prev y", q, prev.y_cur.len()),
        ("next y", q, next.y_cur.len()),
        ("next Ax", r, next.ax_cur.len()),
        ("next By", r, next.by_cur.len()),
    ] {
        if expected != actual {
            return Err(SolverError::Dimension { what, expected, actual });
        }
    }
    let dual = |old: &[f64], new: &[f64], g_old: &[f64], g_new: &[f64]| -> Vec<f64> {
        (0..old.len()).map(|i| (old[i] - new[i]) / gamma_next - g_old[i] + g_new[i]).collect()
    };
    let w1 = dual(&prev.x_cur, &next.x_cur, &prev.grad_f2_cur, &next.grad_f2_cur);
    let w2 = dual(&prev.y_cur, &next.y_cur, &prev.grad_g2_cur, &next.grad_g2_cur);
    let c = problem.c();
    let w3 = (0..r).map(|i| next.ax_cur[i] + next.by_cur[i] - c[i]).collect();
    Ok(ResidualReport::from_vectors(w1, w2, w3))
}

/// Both the 2-norm gate and the ∞-norm gate must pass.
pub fn should_stop(report: &ResidualReport, tol_two: f64, tol_inf: f64) -> bool {
    report.norms().passes(tol_two, tol_inf)
}

/// A primal-dual pair `(x*, y*, u*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Saddle {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
}

fn lagrangian(x: &[f64], y: &[f64], u: &[f64], problem: &ProblemInstance) -> Result<f64, DiagnosticsError> {
    let obj = problem.objective(x, y)?;
    if obj == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let ax = problem.a().apply(x)?;
    let by = problem.b().apply(y)?;
    let c = problem.c();
    let res: Vec<f64> = (0..c.len()).map(|i| ax[i] + by[i] - c[i]).collect();
    Ok(obj + dot(u, &res))
}

/// `L(x, y, u*) − L(x*, y*, u*)`; `+∞` when `(x, y)` violates an indicator.
pub fn lagrangian_gap(x: &[f64], y: &[f64], saddle: &Saddle, problem: &ProblemInstance) -> Result<f64, DiagnosticsError> {
    let here = lagrangian(x, y, &saddle.u, problem)?;
    if here == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(here - lagrangian(&saddle.x, &saddle.y, &saddle.u, problem)?)
}

/// Which energy is measured: `U_k` for the first rule, `V_k` for the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    S1,
    S2,
}

impl Mode {
    pub fn from_subroutine(s: Subroutine) -> Option<Mode> {
        match s {
            Subroutine::S1 => Some(Mode::S1),
            Subroutine::S2 => Some(Mode::S2),
            Subroutine::Fixed => None,
        }
    }

    /// Coefficient of `γ_k P_{k−1}` in the energy.
    pub fn gap_weight(&self) -> f64 {
        match self {
            Mode::S1 => 3.0,
            Mode::S2 => 1.0 + GOLDEN_RATIO,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovWitness {
    pub mode: Mode,
    pub saddle: Saddle,
    pub value: f64,
    /// Lagrangian gap at the previous iterate.
    pub p_prev: f64,
}

/// `½‖x−x*‖² + ½‖x−x₋‖² + ½‖y−y*‖² + ½‖y−y₋‖² + ‖u−u*‖²/(2σ) + w γ P₋`,
/// with `w` from [`Mode::gap_weight`].
pub fn lyapunov_value(
    state: &SolverState,
    saddle: &Saddle,
    sigma: f64,
    mode: Mode,
    problem: &ProblemInstance,
) -> Result<LyapunovWitness, DiagnosticsError> {
    if state.k == 0 {
        return Err(DiagnosticsError::NoPreviousIterate(state.k));
    }
    let p_prev = lagrangian_gap(&state.x_prev, &state.y_prev, saddle, problem)?;
    let value = 0.5 * norm2_sq(&dense::sub(&state.x_cur, &saddle.x))
        + 0.5 * norm2_sq(&dense::sub(&state.x_cur, &state.x_prev))
        + 0.5 * norm2_sq(&dense::sub(&state.y_cur, &saddle.y))
        + 0.5 * norm2_sq(&dense::sub(&state.y_cur, &state.y_prev))
        + norm2_sq(&dense::sub(&state.u_cur, &saddle.u)) / (2.0 * sigma)
        + mode.gap_weight() * state.gamma_cur * p_prev;
    Ok(LyapunovWitness { mode, saddle: saddle.clone(), value, p_prev })
}

/// The three inequalities the chosen stepsize must satisfy, as
/// `left side − ε`. Nonnegative (up to rounding) on every step.
pub fn descent_slacks(decision: &StepDecision, state: &SolverState, sigma: f64, epsilon: f64, mode: Mode) -> Slacks {
    let d = &decision.diag;
    let g = state.gamma_cur;
    let gn = decision.gamma_next;
    let rho = gn / g;
    let (a2, b2) = (d.a * d.a, d.b * d.b);
    match mode {
        Mode::S1 => {
            let primal = |delta: f64, ell: f64, a2: f64, lam: f64| {
                0.5 - 4.0 / 3.0 * rho * rho * delta - 2.0 * g * ell * rho - 8.0 * sigma * a2 * gn * gn * lam - epsilon
            };
            Slacks {
                x: primal(d.delta_x, d.ell_x, a2, d.lam_a),
                y: primal(d.delta_y, d.ell_y, b2, d.lam_b),
                u: 1.0 / (2.0 * sigma) - (d.lam_a + d.lam_b) / (8.0 * sigma) - 4.0 * gn * gn * (a2 + b2) - epsilon,
            }
        }
        Mode::S2 => {
            let phi = GOLDEN_RATIO;
            let (mu_a, mu_b) = (d.mu_a.unwrap_or(0.0), d.mu_b.unwrap_or(0.0));
            let primal = |delta: f64, ell: f64, a2: f64, lam: f64, mu: f64| {
                0.5 - rho * rho * delta
                    - phi * g * ell * rho
                    - 2.0 * phi * phi * sigma * a2 * gn * gn * lam
                    - sigma * a2 * g * rho.powi(3) * mu * (delta + 1.0)
                    - epsilon
            };
            Slacks {
                x: primal(d.delta_x, d.ell_x, a2, d.lam_a, mu_a),
                y: primal(d.delta_y, d.ell_y, b2, d.lam_b, mu_b),
                u: 1.0 / (2.0 * sigma)
                    - (d.lam_a + d.lam_b) / (8.0 * sigma)
                    - gn * (mu_a + mu_b) / sigma
                    - gn * gn * (a2 + b2)
                    - epsilon,
            }
        }
    }
}

/// Constants entering the lower bound on the stepsize sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorInputs {
    pub gamma0: f64,
    pub sigma: f64,
    pub epsilon: f64,
    /// Lipschitz constants of `∇f2` and `∇g2`.
    pub lip_f: f64,
    pub lip_g: f64,
    pub norm_a: f64,
    pub norm_b: f64,
}

/// A positive lower bound on every stepsize the given rule can produce.
///
/// First rule: `min{γ0, √((2−8σε)/(32σ(‖A‖²+‖B‖²))), γx, γy}` with
/// `γx = (1−2ε)/2 / (L + √(L² + (2−4ε)/3·(L² + 6σ‖A‖²)))`.
///
/// Second rule: the dual term is
/// `(2−8σε)/(4σ) / (2/σ + √(4/σ² + (‖A‖²+‖B‖²)(6−8σε)/(2σ)))` and `γx` is
/// the positive root of
/// `σ‖A‖²L²t³ + (2φ²σ‖A‖² + L²)t² + (φL + σ‖A‖²)t − (1−2ε)/2`.
pub fn stepsize_floor(mode: Mode, k: &FloorInputs) -> Result<f64, SolverError> {
    let FloorInputs { gamma0, sigma, epsilon: eps, lip_f, lip_g, norm_a, norm_b } = *k;
    let s = norm_a * norm_a + norm_b * norm_b;
    match mode {
        Mode::S1 => {
            let dual = if s == 0.0 { f64::INFINITY } else { ((2.0 - 8.0 * sigma * eps) / (32.0 * sigma * s)).sqrt() };
            let primal = |l: f64, n: f64| {
                (1.0 - 2.0 * eps) / 2.0 / (l + (l * l + (2.0 - 4.0 * eps) / 3.0 * (l * l + 6.0 * sigma * n * n)).sqrt())
            };
            Ok(gamma0.min(dual).min(primal(lip_f, norm_a)).min(primal(lip_g, norm_b)))
        }
        Mode::S2 => {
            let phi = GOLDEN_RATIO;
            let dual = (2.0 - 8.0 * sigma * eps) / (4.0 * sigma)
                / (2.0 / sigma + (4.0 / (sigma * sigma) + s * (6.0 - 8.0 * sigma * eps) / (2.0 * sigma)).sqrt());
            let primal = |l: f64, n: f64| {
                let n2 = n * n;
                crate::solver::smallest_positive_root(
                    sigma * n2 * l * l,
                    2.0 * phi * phi * sigma * n2 + l * l,
                    phi * l + sigma * n2,
                    -(1.0 - 2.0 * eps) / 2.0,
                )
            };
            Ok(gamma0.min(dual).min(primal(lip_f, norm_a)?).min(primal(lip_g, norm_b)?))
        }
    }
}

/// Largest componentwise gap between the central-difference gradient with
/// step `h` and the block's own gradient.
pub fn finite_diff_check(block: &SmoothBlock, x: &[f64], h: f64) -> Result<f64, DiagnosticsError> {
    if !(h > 0.0) {
        return Err(DiagnosticsError::BadStep(h));
    }
    let grad = block.grad(x)?;
    let mut probe = x.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = block.value(&probe)?;
        probe[i] = x[i] - h;
        let down = block.value(&probe)?;
        probe[i] = x[i];
        worst = worst.max(((up - down) / (2.0 * h) - grad[i]).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_rule_examples() {
        let zero = ResidualReport::from_vectors(vec![0.0], vec![0.0], vec![0.0]);
        assert!(should_stop(&zero, 1e-4, 1e-6));
        let mut r = zero.clone();
        r.two_norm_w3 = 2e-4;
        assert!(!should_stop(&r, 1e-4, 1e-6));
        let r = ResidualReport {
            two_norm_w12: 9e-5,
            two_norm_w3: 9e-5,
            inf_norm_w12: 9e-7,
            inf_norm_w3: 9e-7,
            ..zero
        };
        assert!(should_stop(&r, 1e-4, 1e-6));
    }

    #[test]
    fn report_norms_match_vectors() {
        let r = ResidualReport::from_vectors(vec![3.0], vec![-4.0], vec![1.0, -2.0]);
        assert_eq!(r.two_norm_w12, 5.0);
        assert_eq!(r.inf_norm_w12, 4.0);
        assert_eq!(r.two_norm_w3, 5f64.sqrt());
        assert_eq!(r.inf_norm_w3, 2.0);
    }

    #[test]
    fn finite_differences() {
        let lin = SmoothBlock::linear(vec![1.0, -2.0, 0.5]);
        assert!(finite_diff_check(&lin, &[0.3, 0.1, -4.0], 1e-3).unwrap() <= 1e-12);
        let z = SmoothBlock::zero(2);
        assert_eq!(finite_diff_check(&z, &[1.0, 2.0], 1e-6).unwrap(), 0.0);
        assert!(matches!(finite_diff_check(&z, &[1.0, 2.0], 0.0), Err(DiagnosticsError::BadStep(_))));
    }
}
