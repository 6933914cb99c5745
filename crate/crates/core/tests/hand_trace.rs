// First steps of the scalar instance min ½x² s.t. x − y = 0, started at
// (x, y, u) = (1, 0, 0), worked out by hand.

use alia::diagnostics::{descent_slacks, kkt_residuals, lagrangian_gap, lyapunov_value, Mode, Saddle};
use alia::solver::{
    advance, select_step, select_step_s1, select_step_s2, solve, ActiveTerm, InitialPoint, OpCounters, SolveStatus,
    SolverState, GOLDEN_RATIO,
};
use alia::{LinOp, Matrix, ProblemInstance, ProxBlock, SmoothBlock, SolverOptions, Subroutine};

fn scalar_instance(a: f64) -> ProblemInstance {
    ProblemInstance::new(
        ProxBlock::zero(1),
        SmoothBlock::quadratic(Matrix::identity(1), vec![0.0]).unwrap(),
        ProxBlock::zero(1),
        SmoothBlock::zero(1),
        LinOp::scaled(a, LinOp::identity(1)),
        LinOp::scaled(-1.0, LinOp::identity(1)),
        vec![0.0],
    )
    .unwrap()
}

fn start() -> InitialPoint {
    InitialPoint { x: vec![1.0], y: vec![0.0], u: vec![0.0] }
}

fn opts(sub: Subroutine) -> SolverOptions {
    SolverOptions { subroutine: sub, ..SolverOptions::default() }
}

fn first_step(sub: Subroutine) -> (SolverState, alia::solver::StepDecision, SolverState) {
    let p = scalar_instance(1.0);
    let o = opts(sub);
    let mut ops = OpCounters::default();
    let s0 = SolverState::initial(&p, &start(), o.gamma0, &mut ops).unwrap();
    let d = select_step(&s0, &p, &o, &mut ops).unwrap();
    let s1 = advance(&s0, &d, &p, &o, &mut ops).unwrap();
    (s0, d, s1)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn first_rule_first_step() {
    let (_, d, s1) = first_step(Subroutine::S1);
    assert_eq!(d.delta_u, vec![1.0]);
    assert_eq!((d.diag.a, d.diag.b), (1.0, 1.0));
    assert_eq!((d.diag.lam_a, d.diag.lam_b), (0.0, 0.0));
    assert_eq!(d.diag.gamma_x, f64::INFINITY);
    assert_eq!(d.diag.gamma_y, f64::INFINITY);
    assert_eq!(d.active_term, ActiveTerm::DualCap);
    assert!(close(d.gamma_next, 0.25, 1e-15));
    assert!(close(s1.u_cur[0], 0.25, 1e-15));
    assert!(close(s1.x_cur[0], 0.6875, 1e-15));
    assert!(close(s1.y_cur[0], 0.0625, 1e-15));
}

#[test]
fn second_rule_first_step() {
    let (_, d, s1) = first_step(Subroutine::S2);
    assert_eq!(d.delta_u, vec![1.0]);
    assert_eq!((d.diag.a, d.diag.b), (1.0, 1.0));
    assert_eq!((d.diag.mu_a, d.diag.mu_b), (Some(0.0), Some(0.0)));
    assert_eq!(d.diag.gamma_x, f64::INFINITY);
    assert_eq!(d.diag.theta, Some(1.0));
    assert_eq!(d.diag.psi, Some(2.0));
    assert_eq!(d.active_term, ActiveTerm::DualCap);
    assert!(close(d.gamma_next, 0.5, 1e-15));
    // u¹ = 0.5, x¹ = 1 − 0.5 − 0.25, y¹ = 0.25
    assert!(close(s1.u_cur[0], 0.5, 1e-15));
    assert!(close(s1.x_cur[0], 0.25, 1e-15));
    assert!(close(s1.y_cur[0], 0.25, 1e-15));
}

#[test]
fn residuals_after_first_steps() {
    let p = scalar_instance(1.0);
    let (s0, d, s1) = first_step(Subroutine::S1);
    let r = kkt_residuals(&s0, &s1, d.gamma_next, &p).unwrap();
    assert!(close(r.w1[0], 0.9375, 1e-15));
    assert!(close(r.w2[0], -0.25, 1e-15));
    assert!(close(r.w3[0], 0.625, 1e-15));

    let (s0, d, s1) = first_step(Subroutine::S2);
    let r = kkt_residuals(&s0, &s1, d.gamma_next, &p).unwrap();
    // (1 − 0.25)/0.5 − 1 + 0.25, −0.25/0.5, 0.25 − 0.25
    assert!(close(r.w1[0], 0.75, 1e-15));
    assert!(close(r.w2[0], -0.5, 1e-15));
    assert!(close(r.w3[0], 0.0, 1e-15));
}

#[test]
fn residual_at_fixed_point_is_zero() {
    let p = scalar_instance(1.0);
    let o = opts(Subroutine::S1);
    let mut ops = OpCounters::default();
    let s = SolverState::initial(&p, &InitialPoint::zeros(&p), 1.0, &mut ops).unwrap();
    let d = select_step(&s, &p, &o, &mut ops).unwrap();
    let next = advance(&s, &d, &p, &o, &mut ops).unwrap();
    assert_eq!((next.x_cur[0], next.y_cur[0], next.u_cur[0]), (0.0, 0.0, 0.0));
    let r = kkt_residuals(&s, &next, d.gamma_next, &p).unwrap();
    assert_eq!((r.w1[0], r.w2[0], r.w3[0]), (0.0, 0.0, 0.0));
}

#[test]
fn energies_after_first_steps() {
    let p = scalar_instance(1.0);
    let origin = Saddle { x: vec![0.0], y: vec![0.0], u: vec![0.0] };
    assert_eq!(lagrangian_gap(&[1.0], &[0.0], &origin, &p).unwrap(), 0.5);

    let (_, _, s1) = first_step(Subroutine::S1);
    let w = lyapunov_value(&s1, &origin, 1.0, Mode::S1, &p).unwrap();
    assert_eq!(w.p_prev, 0.5);
    // ½(0.6875² + 0.3125² + 0.0625² + 0.0625² + 0.25²) + 3·0.25·0.5
    //   = ½·0.640625 + 0.375
    assert!(close(w.value, 0.6953125, 1e-15), "{}", w.value);

    // ½(0.25² + 0.75² + 0.25² + 0.25² + 0.5²) + (1 + φ)·0.5·0.5
    let (_, _, s1) = first_step(Subroutine::S2);
    let w = lyapunov_value(&s1, &origin, 1.0, Mode::S2, &p).unwrap();
    assert!(close(w.value, 0.5 + 0.25 * (1.0 + GOLDEN_RATIO), 1e-15), "{}", w.value);
}

#[test]
fn energy_needs_a_previous_iterate() {
    let p = scalar_instance(1.0);
    let mut ops = OpCounters::default();
    let s0 = SolverState::initial(&p, &start(), 1.0, &mut ops).unwrap();
    let origin = Saddle { x: vec![0.0], y: vec![0.0], u: vec![0.0] };
    assert!(lyapunov_value(&s0, &origin, 1.0, Mode::S1, &p).is_err());
}

#[test]
fn slacks_of_first_steps() {
    let (s0, d, _) = first_step(Subroutine::S1);
    let sl = descent_slacks(&d, &s0, 1.0, 0.0, Mode::S1);
    assert_eq!((sl.x, sl.y), (0.5, 0.5));
    assert!(close(sl.u, 0.0, 1e-15));

    let (s0, d, _) = first_step(Subroutine::S2);
    let sl = descent_slacks(&d, &s0, 1.0, 0.0, Mode::S2);
    assert_eq!((sl.x, sl.y), (0.5, 0.5));
    assert!(close(sl.u, 0.0, 1e-15));

    // zero differences leave ½ − ε in the primal slacks
    let sl = descent_slacks(&d, &s0, 1.0, 0.01, Mode::S2);
    assert!(close(sl.x, 0.49, 1e-15) && close(sl.y, 0.49, 1e-15));
}

#[test]
fn young_quotient_reaches_one() {
    // A = [2], Δu = 1 so AᵀΔu = 2 = 8·a²·(x − x₋) with x − x₋ = 1/16
    let p = scalar_instance(2.0);
    let mut ops = OpCounters::default();
    let init = InitialPoint { x: vec![1.0 / 16.0], y: vec![-10.0 / 16.0], u: vec![0.0] };
    let mut s = SolverState::initial(&p, &init, 1.0, &mut ops).unwrap();
    s.x_prev = vec![0.0];
    s.ax_prev = vec![0.0];
    s.grad_f2_prev = vec![0.0];
    let d = select_step_s1(&s, &p, &opts(Subroutine::S1), &mut ops).unwrap();
    assert!(close(d.delta_u[0], 1.0, 1e-15));
    assert_eq!(d.diag.a, 2.0);
    assert!(close(d.diag.lam_a, 1.0, 1e-15));
}

#[test]
fn zero_differences_zero_quotients() {
    let p = scalar_instance(1.0);
    let mut ops = OpCounters::default();
    let init = InitialPoint { x: vec![0.3], y: vec![-0.7], u: vec![1.1] };
    let s = SolverState::initial(&p, &init, 0.8, &mut ops).unwrap();
    let d1 = select_step_s1(&s, &p, &opts(Subroutine::S1), &mut ops).unwrap();
    let d2 = select_step_s2(&s, &p, &opts(Subroutine::S2), &mut ops).unwrap();
    for d in [&d1, &d2] {
        assert_eq!((d.diag.lam_a, d.diag.lam_b), (0.0, 0.0));
        assert_eq!((d.diag.ell_x, d.diag.lip_x, d.diag.delta_x), (0.0, 0.0, 0.0));
        assert_eq!((d.diag.ell_y, d.diag.lip_y, d.diag.delta_y), (0.0, 0.0, 0.0));
    }
    assert_eq!((d2.diag.mu_a, d2.diag.mu_b), (Some(0.0), Some(0.0)));
}

#[test]
fn uncoupled_problem_has_no_dual_cap() {
    let p = ProblemInstance::new(
        ProxBlock::zero(1),
        SmoothBlock::quadratic(Matrix::identity(1), vec![0.0]).unwrap(),
        ProxBlock::zero(1),
        SmoothBlock::zero(1),
        LinOp::zero(1, 1),
        LinOp::zero(1, 1),
        vec![0.0],
    )
    .unwrap();
    let o = opts(Subroutine::S2);
    let mut ops = OpCounters::default();
    let s0 = SolverState::initial(&p, &start(), 1.0, &mut ops).unwrap();
    let d = select_step(&s0, &p, &o, &mut ops).unwrap();
    let s1 = advance(&s0, &d, &p, &o, &mut ops).unwrap();
    let d = select_step(&s1, &p, &o, &mut ops).unwrap();
    assert_eq!((d.diag.a, d.diag.b), (0.0, 0.0));
    assert_eq!(d.diag.dual_cap, f64::INFINITY);
    let expected = (GOLDEN_RATIO * s1.gamma_cur).min(d.diag.gamma_x).min(d.diag.gamma_y);
    assert_eq!(d.gamma_next, expected);
}

#[test]
fn trivial_problem_is_stationary() {
    let p = ProblemInstance::new(
        ProxBlock::zero(2),
        SmoothBlock::zero(2),
        ProxBlock::zero(1),
        SmoothBlock::zero(1),
        LinOp::zero(1, 2),
        LinOp::zero(1, 1),
        vec![0.0],
    )
    .unwrap();
    let o = opts(Subroutine::S1);
    let mut ops = OpCounters::default();
    let init = InitialPoint { x: vec![0.4, -2.0], y: vec![3.0], u: vec![0.0] };
    let s0 = SolverState::initial(&p, &init, 1.0, &mut ops).unwrap();
    let d = select_step(&s0, &p, &o, &mut ops).unwrap();
    assert_eq!(d.delta_u, vec![0.0]);
    let s1 = advance(&s0, &d, &p, &o, &mut ops).unwrap();
    assert_eq!(s1.k, 1);
    assert_eq!((s1.x_cur.clone(), s1.y_cur.clone(), s1.u_cur.clone()), (init.x, init.y, init.u));
}

#[test]
fn no_iterations_returns_start() {
    let p = scalar_instance(1.0);
    let o = SolverOptions { max_iters: 0, ..SolverOptions::default() };
    let out = solve(&p, &o, &start()).unwrap();
    assert_eq!(out.status, SolveStatus::MaxIters);
    assert!(out.trace.is_empty());
    assert_eq!(out.state.k, 0);
    assert_eq!((out.state.x_cur.clone(), out.state.y_cur.clone()), (vec![1.0], vec![0.0]));
}

#[test]
fn both_rules_converge_to_origin() {
    let p = scalar_instance(1.0);
    for sub in [Subroutine::S1, Subroutine::S2] {
        let out = solve(&p, &opts(sub), &start()).unwrap();
        assert_eq!(out.status, SolveStatus::Converged, "{sub:?}");
        let s = &out.state;
        assert!(s.x_cur[0].abs() < 1e-3 && s.y_cur[0].abs() < 1e-3 && s.u_cur[0].abs() < 1e-3, "{sub:?}");
        assert!(out.min_gamma() > 0.0);
    }
}

#[test]
fn fixed_step_follows_scalar_recurrence() {
    let p = scalar_instance(1.0);
    let g = 0.3;
    let o = SolverOptions { subroutine: Subroutine::Fixed, gamma0: g, max_iters: 5, ..SolverOptions::default() };
    let mut seen = Vec::new();
    alia::solver::solve_observed(&p, &o, &start(), |_, _, next| {
        seen.push((next.x_cur[0], next.y_cur[0], next.u_cur[0]))
    })
    .unwrap();

    let (mut x, mut y, mut u) = (1.0f64, 0.0f64, 0.0f64);
    let (mut xp, mut yp) = (x, y);
    for (k, got) in seen.iter().enumerate() {
        let du = x - y + 2.0 * (x - xp) - 2.0 * (y - yp);
        u += g * du;
        let xn = x - g * x - g * u;
        let yn = y + g * u;
        xp = x;
        yp = y;
        x = xn;
        y = yn;
        assert!(close(got.0, x, 1e-14) && close(got.1, y, 1e-14) && close(got.2, u, 1e-14), "step {k}");
    }
    assert_eq!(seen.len(), 5);
}
