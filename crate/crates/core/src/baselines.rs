//! Fixed-step reference methods: linearized proximal ADMM and the
//! Condat–Vu primal-dual splitting.

use std::time::Instant;

use thiserror::Error;

use crate::dense::{all_finite, norm_inf};
use crate::diagnostics::ResidualReport;
use crate::funcblocks::{BlockError, ProxBlock, SmoothBlock};
use crate::linops::{operator_norm, LinOp, LinOpError};
use crate::solver::{InitialPoint, IterationRecord, OpCounters, ProblemInstance, SolveStatus, SolverError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("invalid option {name}: {reason}")]
    InvalidOption { name: &'static str, reason: String },
    #[error("linearization matrix is not PSD: {which} = {eta} exceeds {limit}")]
    NotPsd { which: &'static str, eta: f64, limit: f64 },
    #[error("problem does not have the form f(x) + g(x) + h(Ax): {0}")]
    NotCompositeForm(&'static str),
    #[error("smooth term has no Lipschitz estimate; supply one")]
    MissingLipschitz,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    LinOp(#[from] LinOpError),
}

/// Stopping tolerances shared with the adaptive solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub tol_two: f64,
    pub tol_inf: f64,
    pub max_iters: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { tol_two: 1e-4, tol_inf: 1e-6, max_iters: 100_000 }
    }
}

#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub trace: Vec<IterationRecord>,
    pub status: SolveStatus,
    pub ops: OpCounters,
}

fn norm_estimate(op: &LinOp) -> Result<f64, BaselineError> {
    match operator_norm(op, 1e-10, 50_000, 0xf11e) {
        Ok(v) => Ok(v),
        Err(LinOpError::NotConverged { last_estimate, .. }) => Ok(last_estimate),
        Err(e) => Err(e.into()),
    }
}

fn record(k: usize, step: f64, report: &ResidualReport, ops: OpCounters, started: Instant) -> IterationRecord {
    IterationRecord {
        k,
        gamma: step,
        active_term: None,
        lam_a: None,
        lam_b: None,
        mu_a: None,
        mu_b: None,
        a: None,
        b: None,
        residuals: report.norms(),
        slacks: None,
        ops,
        wall_ns: started.elapsed().as_nanos(),
    }
}

/// Options of the linearized ADMM with `P = I/η_x − σAᵀA`, `Q = I/η_y − σBᵀB`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipOptions {
    pub sigma: f64,
    /// Dual extrapolation factor.
    pub phi: f64,
    pub eta_x: f64,
    pub eta_y: f64,
}

impl FlipOptions {
    /// Checks that both linearization matrices are PSD, i.e.
    /// `η ≤ (1 − 1e-6) / (σ‖A‖²)`, with `‖A‖` from power iteration.
    pub fn new(problem: &ProblemInstance, sigma: f64, phi: f64, eta_x: f64, eta_y: f64) -> Result<Self, BaselineError> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(BaselineError::InvalidOption { name, reason: format!("must be positive and finite, got {v}") })
            }
        };
        positive("sigma", sigma)?;
        positive("phi", phi)?;
        positive("eta_x", eta_x)?;
        positive("eta_y", eta_y)?;
        for (which, eta, op) in [("eta_x", eta_x, problem.a()), ("eta_y", eta_y, problem.b())] {
            let n = norm_estimate(op)?;
            if n > 0.0 {
                let limit = (1.0 - 1e-6) / (sigma * n * n);
                if eta > limit {
                    return Err(BaselineError::NotPsd { which, eta, limit });
                }
            }
        }
        Ok(Self { sigma, phi, eta_x, eta_y })
    }

    /// `φ = 1` and `η = 0.99/(σ‖A‖²)` (or 1 for a zero operator).
    pub fn with_defaults(problem: &ProblemInstance, sigma: f64) -> Result<Self, BaselineError> {
        let eta = |op: &LinOp| -> Result<f64, BaselineError> {
            let n = norm_estimate(op)?;
            Ok(if n > 0.0 { 0.99 / (sigma * n * n) } else { 1.0 })
        };
        let (ex, ey) = (eta(problem.a())?, eta(problem.b())?);
        Self::new(problem, sigma, 1.0, ex, ey)
    }
}

/// Gauss–Seidel sweep
///
/// ```text
/// x⁺ = prox_{η_x f1}(x − η_x(∇f2(x) + Aᵀu + σAᵀ(Ax + By − c)))
/// y⁺ = prox_{η_y g1}(y − η_y(∇g2(y) + Bᵀu + σBᵀ(Ax⁺ + By − c)))
/// u⁺ = u + φσ(Ax⁺ + By⁺ − c)
/// ```
pub fn flip_admm_solve(
    problem: &ProblemInstance,
    opts: &FlipOptions,
    init: &InitialPoint,
    stop: &StopRule,
) -> Result<BaselineOutcome, BaselineError> {
    let (p, q, r) = problem.dims();
    for (what, expected, actual) in [("x0", p, init.x.len()), ("y0", q, init.y.len()), ("u0", r, init.u.len())] {
        if expected != actual {
            return Err(SolverError::Dimension { what, expected, actual }.into());
        }
    }
    let FlipOptions { sigma, phi, eta_x, eta_y } = *opts;
    let c = problem.c();
    let mut ops = OpCounters::default();
    let mut x = init.x.clone();
    let mut y = init.y.clone();
    let mut u = init.u.clone();
    let mut gx = problem.grad_f2(&x, &mut ops)?;
    let mut gy = problem.grad_g2(&y, &mut ops)?;
    let mut ax = problem.apply_a(&x, &mut ops)?;
    let mut by = problem.apply_b(&y, &mut ops)?;
    let mut trace = Vec::new();
    let mut status = SolveStatus::MaxIters;

    for k in 1..=stop.max_iters {
        let started = Instant::now();
        let before = ops;
        // x step: Aᵀ(u + σ r) in one adjoint
        let shifted: Vec<f64> = (0..r).map(|i| u[i] + sigma * (ax[i] + by[i] - c[i])).collect();
        let at_shift = problem.adjoint_a(&shifted, &mut ops)?;
        let vx: Vec<f64> = (0..p).map(|i| x[i] - eta_x * (gx[i] + at_shift[i])).collect();
        let x_next = problem.prox_f1(&vx, eta_x, &mut ops)?;
        let ax_next = problem.apply_a(&x_next, &mut ops)?;

        let shifted_y: Vec<f64> = (0..r).map(|i| u[i] + sigma * (ax_next[i] + by[i] - c[i])).collect();
        let bt_shift = problem.adjoint_b(&shifted_y, &mut ops)?;
        let vy: Vec<f64> = (0..q).map(|i| y[i] - eta_y * (gy[i] + bt_shift[i])).collect();
        let y_next = problem.prox_g1(&vy, eta_y, &mut ops)?;
        let by_next = problem.apply_b(&y_next, &mut ops)?;

        let w3: Vec<f64> = (0..r).map(|i| ax_next[i] + by_next[i] - c[i]).collect();
        let u_next: Vec<f64> = (0..r).map(|i| u[i] + phi * sigma * w3[i]).collect();
        if !all_finite(&x_next) || !all_finite(&y_next) || !all_finite(&u_next) {
            status = SolveStatus::Diverged;
            break;
        }
        let gx_next = problem.grad_f2(&x_next, &mut ops)?;
        let gy_next = problem.grad_g2(&y_next, &mut ops)?;
        let at_u_next = problem.adjoint_a(&u_next, &mut ops)?;
        let bt_u_next = problem.adjoint_b(&u_next, &mut ops)?;

        // subgradient of f1 at x⁺ from the prox optimality, plus the smooth and coupling terms at the new point
        let w1: Vec<f64> = (0..p)
            .map(|i| (x[i] - x_next[i]) / eta_x - gx[i] - at_shift[i] + gx_next[i] + at_u_next[i])
            .collect();
        let w2: Vec<f64> = (0..q)
            .map(|i| (y[i] - y_next[i]) / eta_y - gy[i] - bt_shift[i] + gy_next[i] + bt_u_next[i])
            .collect();
        let report = ResidualReport::from_vectors(w1, w2, w3);

        x = x_next;
        y = y_next;
        u = u_next;
        gx = gx_next;
        gy = gy_next;
        ax = ax_next;
        by = by_next;
        trace.push(record(k, eta_x, &report, ops - before, started));
        let norms = report.norms();
        if !norms.is_finite() {
            status = SolveStatus::Diverged;
            break;
        }
        if norms.passes(stop.tol_two, stop.tol_inf) {
            status = SolveStatus::Converged;
            break;
        }
    }
    Ok(BaselineOutcome { x, y, u, trace, status, ops })
}

/// `minimize f(x) + g(x) + h(Ax)` with `f` smooth, `g` and `h` proximable.
#[derive(Debug, Clone)]
pub struct CompositeProblem {
    pub f: SmoothBlock,
    pub g: ProxBlock,
    pub h: ProxBlock,
    pub a: LinOp,
}

impl CompositeProblem {
    pub fn new(f: SmoothBlock, g: ProxBlock, h: ProxBlock, a: LinOp) -> Result<Self, BaselineError> {
        let dim = |expected: usize, actual: usize, what| {
            if expected == actual {
                Ok(())
            } else {
                Err(BaselineError::Solver(SolverError::Dimension { what, expected, actual }))
            }
        };
        dim(a.cols(), f.dim(), "f dimension vs A columns")?;
        dim(a.cols(), g.dim(), "g dimension vs A columns")?;
        dim(a.rows(), h.dim(), "h dimension vs A rows")?;
        Ok(Self { f, g, h, a })
    }

    /// Reads `f = f2`, `g = f1`, `h = g1` off a two-block instance with
    /// `B = −I`, `c = 0` and `g2 = 0`.
    pub fn from_instance(problem: &ProblemInstance) -> Result<Self, BaselineError> {
        if !problem.b().is_negative_identity() {
            return Err(BaselineError::NotCompositeForm("B must be the negative identity"));
        }
        if problem.c().iter().any(|v| *v != 0.0) {
            return Err(BaselineError::NotCompositeForm("c must be zero"));
        }
        if !problem.g2().is_zero() {
            return Err(BaselineError::NotCompositeForm("g2 must be zero"));
        }
        Self::new(problem.f2().clone(), problem.f1().clone(), problem.g1().clone(), problem.a().clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondatVuOptions {
    pub beta: f64,
    pub alpha: f64,
    pub lipschitz: f64,
}

impl CondatVuOptions {
    /// `alpha = 0.99 / (L/2 + β‖A‖²)`. `L` is taken from `lipschitz` when
    /// given, otherwise estimated for zero, linear and quadratic `f`.
    pub fn new(problem: &CompositeProblem, beta: f64, lipschitz: Option<f64>) -> Result<Self, BaselineError> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(BaselineError::InvalidOption { name: "beta", reason: format!("must be positive and finite, got {beta}") });
        }
        let lipschitz = match lipschitz {
            Some(l) if l >= 0.0 && l.is_finite() => l,
            Some(l) => {
                return Err(BaselineError::InvalidOption {
                    name: "lipschitz",
                    reason: format!("must be nonnegative and finite, got {l}"),
                })
            }
            None => problem.f.lipschitz_estimate()?.ok_or(BaselineError::MissingLipschitz)?,
        };
        let n = norm_estimate(&problem.a)?;
        let denom = lipschitz / 2.0 + beta * n * n;
        let alpha = if denom > 0.0 { 0.99 / denom } else { 1.0 };
        Ok(Self { beta, alpha, lipschitz })
    }
}

/// `prox_{βh*}(v) = v − β prox_{h/β}(v/β)`.
pub fn prox_conjugate(h: &ProxBlock, v: &[f64], beta: f64) -> Result<Vec<f64>, BlockError> {
    let scaled: Vec<f64> = v.iter().map(|t| t / beta).collect();
    let inner = h.prox(&scaled, 1.0 / beta)?;
    Ok(v.iter().zip(&inner).map(|(v, z)| v - beta * z).collect())
}

/// ```text
/// x⁺ = prox_{αg}(x − αAᵀu − α∇f(x))
/// u⁺ = prox_{βh*}(u + βA(2x⁺ − x))
/// ```
///
/// The outcome's `y` is the split variable `prox_{h/β}` recovered from the
/// dual step, so the residuals are those of the two-block form with
/// `B = −I`, `c = 0`. Counters map `f, g, h` onto `f2, f1, g1`.
pub fn condat_vu_solve(
    problem: &CompositeProblem,
    opts: &CondatVuOptions,
    x0: &[f64],
    u0: &[f64],
    stop: &StopRule,
) -> Result<BaselineOutcome, BaselineError> {
    let (r, p) = problem.a.shape();
    if x0.len() != p {
        return Err(SolverError::Dimension { what: "x0", expected: p, actual: x0.len() }.into());
    }
    if u0.len() != r {
        return Err(SolverError::Dimension { what: "u0", expected: r, actual: u0.len() }.into());
    }
    let CondatVuOptions { alpha, beta, .. } = *opts;
    let a = &problem.a;
    let mut ops = OpCounters::default();
    let mut x = x0.to_vec();
    let mut u = u0.to_vec();
    let mut y = vec![0.0; r];
    let mut gx = problem.f.grad(&x)?;
    ops.grad_f2 += 1;
    let mut at_u = a.apply_adjoint(&u)?;
    ops.adjoint_a += 1;
    let mut ax = a.apply(&x)?;
    ops.apply_a += 1;
    let mut trace = Vec::new();
    let mut status = SolveStatus::MaxIters;

    for k in 1..=stop.max_iters {
        let started = Instant::now();
        let before = ops;
        let v: Vec<f64> = (0..p).map(|i| x[i] - alpha * (at_u[i] + gx[i])).collect();
        let x_next = problem.g.prox(&v, alpha)?;
        ops.prox_f1 += 1;
        let ax_next = a.apply(&x_next)?;
        ops.apply_a += 1;
        let dual_in: Vec<f64> = (0..r).map(|i| u[i] + beta * (2.0 * ax_next[i] - ax[i])).collect();
        let u_next = prox_conjugate(&problem.h, &dual_in, beta)?;
        ops.prox_g1 += 1;
        let y_next: Vec<f64> = (0..r).map(|i| (dual_in[i] - u_next[i]) / beta).collect();
        if !all_finite(&x_next) || !all_finite(&u_next) {
            status = SolveStatus::Diverged;
            break;
        }
        let gx_next = problem.f.grad(&x_next)?;
        ops.grad_f2 += 1;
        let at_next = a.apply_adjoint(&u_next)?;
        ops.adjoint_a += 1;

        let w1: Vec<f64> = (0..p)
            .map(|i| (x[i] - x_next[i]) / alpha - gx[i] - at_u[i] + gx_next[i] + at_next[i])
            .collect();
        // u⁺ ∈ ∂h(y⁺) holds exactly, so the y residual vanishes
        let w2 = vec![0.0; r];
        let w3: Vec<f64> = (0..r).map(|i| ax_next[i] - y_next[i]).collect();
        let report = ResidualReport::from_vectors(w1, w2, w3);

        x = x_next;
        u = u_next;
        y = y_next;
        gx = gx_next;
        at_u = at_next;
        ax = ax_next;
        trace.push(record(k, alpha, &report, ops - before, started));
        let norms = report.norms();
        if !norms.is_finite() {
            status = SolveStatus::Diverged;
            break;
        }
        if norms.passes(stop.tol_two, stop.tol_inf) {
            status = SolveStatus::Converged;
            break;
        }
    }
    Ok(BaselineOutcome { x, y, u, trace, status, ops })
}

/// `max |prox_{βh*}(v) + β prox_{h/β}(v/β) − v|`, zero up to rounding.
pub fn moreau_defect(h: &ProxBlock, v: &[f64], beta: f64) -> Result<f64, BlockError> {
    let conj = prox_conjugate(h, v, beta)?;
    let scaled: Vec<f64> = v.iter().map(|t| t / beta).collect();
    let primal = h.prox(&scaled, 1.0 / beta)?;
    let defect: Vec<f64> = (0..v.len()).map(|i| conj[i] + beta * primal[i] - v[i]).collect();
    Ok(norm_inf(&defect))
}
