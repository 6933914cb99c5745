use std::time::Instant;

use crate::dense::{all_finite, norm2};
use crate::diagnostics::{descent_slacks, kkt_residuals, should_stop, Mode};

use super::step::{select_step, StepDecision};
use super::{IterationRecord, OpCounters, ProblemInstance, SolveStatus, SolverError, SolverOptions};

/// Starting point `(x⁰, y⁰, u⁰)`; the previous iterate is taken equal to it.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
}

impl InitialPoint {
    pub fn zeros(problem: &ProblemInstance) -> Self {
        let (p, q, r) = problem.dims();
        Self { x: vec![0.0; p], y: vec![0.0; q], u: vec![0.0; r] }
    }
}

/// Current and previous iterates with every product the next step reads.
///
/// Gradients and the products `Ax`, `By`, `Aᵀu`, `Bᵀu` are carried from the
/// step that produced them and never recomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub k: usize,
    pub x_cur: Vec<f64>,
    pub x_prev: Vec<f64>,
    pub y_cur: Vec<f64>,
    pub y_prev: Vec<f64>,
    pub u_cur: Vec<f64>,
    pub u_prev: Vec<f64>,
    pub gamma_cur: f64,
    pub grad_f2_cur: Vec<f64>,
    pub grad_f2_prev: Vec<f64>,
    pub grad_g2_cur: Vec<f64>,
    pub grad_g2_prev: Vec<f64>,
    pub ax_cur: Vec<f64>,
    pub ax_prev: Vec<f64>,
    pub by_cur: Vec<f64>,
    pub by_prev: Vec<f64>,
    pub at_u: Vec<f64>,
    pub bt_u: Vec<f64>,
}

impl SolverState {
    pub fn initial(
        problem: &ProblemInstance,
        init: &InitialPoint,
        gamma0: f64,
        ops: &mut OpCounters,
    ) -> Result<Self, SolverError> {
        let (p, q, r) = problem.dims();
        for (what, expected, actual) in [("x0", p, init.x.len()), ("y0", q, init.y.len()), ("u0", r, init.u.len())] {
            if expected != actual {
                return Err(SolverError::Dimension { what, expected, actual });
            }
        }
        let gx = problem.grad_f2(&init.x, ops)?;
        let gy = problem.grad_g2(&init.y, ops)?;
        let ax = problem.apply_a(&init.x, ops)?;
        let by = problem.apply_b(&init.y, ops)?;
        let at_u = problem.adjoint_a(&init.u, ops)?;
        let bt_u = problem.adjoint_b(&init.u, ops)?;
        Ok(Self {
            k: 0,
            x_cur: init.x.clone(),
            x_prev: init.x.clone(),
            y_cur: init.y.clone(),
            y_prev: init.y.clone(),
            u_cur: init.u.clone(),
            u_prev: init.u.clone(),
            gamma_cur: gamma0,
            grad_f2_cur: gx.clone(),
            grad_f2_prev: gx,
            grad_g2_cur: gy.clone(),
            grad_g2_prev: gy,
            ax_cur: ax.clone(),
            ax_prev: ax,
            by_cur: by.clone(),
            by_prev: by,
            at_u,
            bt_u,
        })
    }
}

/// Dual ascent along `Δu`, then the two independent primal prox steps.
pub fn advance(
    state: &SolverState,
    decision: &StepDecision,
    problem: &ProblemInstance,
    opts: &SolverOptions,
    ops: &mut OpCounters,
) -> Result<SolverState, SolverError> {
    let g = decision.gamma_next;
    let sg = opts.sigma * g;
    let u_next: Vec<f64> = state.u_cur.iter().zip(&decision.delta_u).map(|(u, d)| u + sg * d).collect();
    let at_u: Vec<f64> = state.at_u.iter().zip(&decision.at_delta_u).map(|(v, d)| v + sg * d).collect();
    let bt_u: Vec<f64> = state.bt_u.iter().zip(&decision.bt_delta_u).map(|(v, d)| v + sg * d).collect();

    let vx: Vec<f64> = (0..state.x_cur.len())
        .map(|i| state.x_cur[i] - g * state.grad_f2_cur[i] - g * at_u[i])
        .collect();
    let vy: Vec<f64> = (0..state.y_cur.len())
        .map(|i| state.y_cur[i] - g * state.grad_g2_cur[i] - g * bt_u[i])
        .collect();
    let x_next = problem.prox_f1(&vx, g, ops)?;
    let y_next = problem.prox_g1(&vy, g, ops)?;
    if !all_finite(&u_next) {
        return Err(SolverError::NonFinite("u iterate"));
    }
    if !all_finite(&x_next) {
        return Err(SolverError::NonFinite("x iterate"));
    }
    if !all_finite(&y_next) {
        return Err(SolverError::NonFinite("y iterate"));
    }
    let gx = problem.grad_f2(&x_next, ops)?;
    let gy = problem.grad_g2(&y_next, ops)?;
    let ax = problem.apply_a(&x_next, ops)?;
    let by = problem.apply_b(&y_next, ops)?;

    Ok(SolverState {
        k: state.k + 1,
        x_prev: state.x_cur.clone(),
        x_cur: x_next,
        y_prev: state.y_cur.clone(),
        y_cur: y_next,
        u_prev: state.u_cur.clone(),
        u_cur: u_next,
        gamma_cur: g,
        grad_f2_prev: state.grad_f2_cur.clone(),
        grad_f2_cur: gx,
        grad_g2_prev: state.grad_g2_cur.clone(),
        grad_g2_cur: gy,
        ax_prev: state.ax_cur.clone(),
        ax_cur: ax,
        by_prev: state.by_cur.clone(),
        by_cur: by,
        at_u,
        bt_u,
    })
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub state: SolverState,
    pub trace: Vec<IterationRecord>,
    pub status: SolveStatus,
    /// Totals including the setup evaluations at the initial point.
    pub ops: OpCounters,
}

impl SolveOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn min_gamma(&self) -> f64 {
        self.trace.iter().map(|r| r.gamma).fold(f64::INFINITY, f64::min)
    }
}

pub fn solve(problem: &ProblemInstance, opts: &SolverOptions, init: &InitialPoint) -> Result<SolveOutcome, SolverError> {
    solve_observed(problem, opts, init, |_, _, _| {})
}

/// [`solve`] with a callback seeing `(state, decision, next)` for every step.
pub fn solve_observed<F>(
    problem: &ProblemInstance,
    opts: &SolverOptions,
    init: &InitialPoint,
    mut observer: F,
) -> Result<SolveOutcome, SolverError>
where
    F: FnMut(&SolverState, &StepDecision, &SolverState),
{
    opts.validate()?;
    let mut ops = OpCounters::default();
    let mut state = SolverState::initial(problem, init, opts.gamma0, &mut ops)?;
    let mut trace = Vec::new();
    let mut status = SolveStatus::MaxIters;
    let mode = Mode::from_subroutine(opts.subroutine);

    for _ in 0..opts.max_iters {
        let started = Instant::now();
        let before = ops;
        let decision = match select_step(&state, problem, opts, &mut ops) {
            Ok(d) => d,
            Err(SolverError::NonFinite(_)) => {
                status = SolveStatus::Diverged;
                break;
            }
            Err(e) => return Err(e),
        };
        let next = match advance(&state, &decision, problem, opts, &mut ops) {
            Ok(s) => s,
            Err(SolverError::NonFinite(_)) => {
                status = SolveStatus::Diverged;
                break;
            }
            Err(e) => return Err(e),
        };
        let report = kkt_residuals(&state, &next, decision.gamma_next, problem)?;
        let slacks = match (opts.verify, mode) {
            (true, Some(m)) => Some(descent_slacks(&decision, &state, opts.sigma, opts.epsilon, m)),
            _ => None,
        };
        let norms = report.norms();
        let record = IterationRecord {
            k: next.k,
            gamma: decision.gamma_next,
            active_term: Some(decision.active_term),
            lam_a: Some(decision.diag.lam_a),
            lam_b: Some(decision.diag.lam_b),
            mu_a: decision.diag.mu_a,
            mu_b: decision.diag.mu_b,
            a: Some(decision.diag.a),
            b: Some(decision.diag.b),
            residuals: norms,
            slacks,
            ops: ops - before,
            wall_ns: started.elapsed().as_nanos(),
        };
        observer(&state, &decision, &next);
        trace.push(record);
        state = next;
        if !norms.is_finite() || !norm2(&state.u_cur).is_finite() {
            status = SolveStatus::Diverged;
            break;
        }
        if should_stop(&report, opts.tol_two, opts.tol_inf) {
            status = SolveStatus::Converged;
            break;
        }
    }
    Ok(SolveOutcome { state, trace, status, ops })
}
