//! Stepsize and dual-direction selection.

use crate::dense::{self, all_finite, dot, norm2, norm2_sq};

use super::cubic::smallest_positive_root;
use super::iterate::SolverState;
use super::{OpCounters, ProblemInstance, SolverError, SolverOptions, Subroutine};

/// `(1 + √5) / 2`.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// Which term of the stepsize minimum was attained first, in the order
/// growth, dual cap, x cap, y cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActiveTerm {
    Growth,
    DualCap,
    Gx,
    Gy,
    Fixed,
}

impl ActiveTerm {
    pub fn as_str(&self) -> &'static str {
        match self {
            ActiveTerm::Growth => "growth",
            ActiveTerm::DualCap => "dual_cap",
            ActiveTerm::Gx => "Gx",
            ActiveTerm::Gy => "Gy",
            ActiveTerm::Fixed => "fixed",
        }
    }
}

/// Intermediate quantities of one stepsize selection.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepDiagnostics {
    pub a: f64,
    pub b: f64,
    pub lam_a: f64,
    pub lam_b: f64,
    pub mu_a: Option<f64>,
    pub mu_b: Option<f64>,
    pub ell_x: f64,
    pub ell_y: f64,
    pub lip_x: f64,
    pub lip_y: f64,
    pub delta_x: f64,
    pub delta_y: f64,
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub theta: Option<f64>,
    pub psi: Option<f64>,
    pub growth: f64,
    pub dual_cap: f64,
    /// `γ⁺ / γ`.
    pub rho: f64,
}

impl StepDiagnostics {
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let opt = |v: Option<f64>| v.unwrap_or(f64::NAN);
        vec![
            ("a", self.a),
            ("b", self.b),
            ("lamA", self.lam_a),
            ("lamB", self.lam_b),
            ("muA", opt(self.mu_a)),
            ("muB", opt(self.mu_b)),
            ("ell_x", self.ell_x),
            ("ell_y", self.ell_y),
            ("L_x", self.lip_x),
            ("L_y", self.lip_y),
            ("delta_x", self.delta_x),
            ("delta_y", self.delta_y),
            ("Gamma_x", self.gamma_x),
            ("Gamma_y", self.gamma_y),
            ("Theta", opt(self.theta)),
            ("Psi", opt(self.psi)),
            ("growth", self.growth),
            ("dual_cap", self.dual_cap),
            ("rho", self.rho),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDecision {
    pub gamma_next: f64,
    pub delta_u: Vec<f64>,
    /// `AᵀΔu`, reused by the dual update of `Aᵀu`.
    pub at_delta_u: Vec<f64>,
    pub bt_delta_u: Vec<f64>,
    pub diag: StepDiagnostics,
    pub active_term: ActiveTerm,
}

/// `n / d` with `0/0 = 0`.
fn quot(n: f64, d: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        n / d
    }
}

fn finite(name: &'static str, v: f64) -> Result<f64, SolverError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SolverError::NonFinite(name))
    }
}

/// `Ax + By − c + e·A(x − x₋) + e·B(y − y₋)` from the cached products.
fn dual_direction(state: &SolverState, problem: &ProblemInstance, extrapolation: f64) -> Vec<f64> {
    let c = problem.c();
    (0..c.len())
        .map(|i| {
            state.ax_cur[i] + state.by_cur[i] - c[i]
                + extrapolation * (state.ax_cur[i] - state.ax_prev[i])
                + extrapolation * (state.by_cur[i] - state.by_prev[i])
        })
        .collect()
}

/// `⟨s, d⟩ / (‖s‖²/(k1 a²) + k2 a² ‖d‖²)`, the Young-equality coefficient.
fn young_quotient(s: &[f64], d: &[f64], a: f64, k1: f64, k2: f64) -> f64 {
    let a2 = a * a;
    let first = quot(norm2_sq(s), k1 * a2);
    quot(dot(s, d), first + k2 * a2 * norm2_sq(d))
}

/// `(ℓ, L)` from the cached gradients at the current and previous points.
fn curvature(x_prev: &[f64], x_cur: &[f64], g_prev: &[f64], g_cur: &[f64]) -> (f64, f64) {
    let dx = dense::sub(x_prev, x_cur);
    let dg = dense::sub(g_prev, g_cur);
    (quot(dot(&dg, &dx), norm2_sq(&dx)), quot(norm2(&dg), norm2(&dx)))
}

struct Shared {
    delta_u: Vec<f64>,
    at_delta_u: Vec<f64>,
    bt_delta_u: Vec<f64>,
    a: f64,
    b: f64,
    dx: Vec<f64>,
    dy: Vec<f64>,
    ell_x: f64,
    ell_y: f64,
    lip_x: f64,
    lip_y: f64,
    delta_x: f64,
    delta_y: f64,
}

fn shared_quantities(
    state: &SolverState,
    problem: &ProblemInstance,
    extrapolation: f64,
    ops: &mut OpCounters,
) -> Result<Shared, SolverError> {
    let delta_u = dual_direction(state, problem, extrapolation);
    if !all_finite(&delta_u) {
        return Err(SolverError::NonFinite("dual direction"));
    }
    let at_delta_u = problem.adjoint_a(&delta_u, ops)?;
    let bt_delta_u = problem.adjoint_b(&delta_u, ops)?;
    let du_norm = norm2(&delta_u);
    let a = finite("a", quot(norm2(&at_delta_u), du_norm))?;
    let b = finite("b", quot(norm2(&bt_delta_u), du_norm))?;
    let dx = dense::sub(&state.x_cur, &state.x_prev);
    let dy = dense::sub(&state.y_cur, &state.y_prev);
    let (ell_x, lip_x) = curvature(&state.x_prev, &state.x_cur, &state.grad_f2_prev, &state.grad_f2_cur);
    let (ell_y, lip_y) = curvature(&state.y_prev, &state.y_cur, &state.grad_g2_prev, &state.grad_g2_cur);
    let g = state.gamma_cur;
    let delta_x = finite("delta_x", g * g * lip_x * lip_x - 2.0 * g * ell_x)?;
    let delta_y = finite("delta_y", g * g * lip_y * lip_y - 2.0 * g * ell_y)?;
    finite("ell_x", ell_x)?;
    finite("ell_y", ell_y)?;
    Ok(Shared { delta_u, at_delta_u, bt_delta_u, a, b, dx, dy, ell_x, ell_y, lip_x, lip_y, delta_x, delta_y })
}

/// Plain minimum; the active term is the first attaining entry.
fn pick(terms: [(f64, ActiveTerm); 4]) -> (f64, ActiveTerm) {
    let mut best = terms[0];
    for t in &terms[1..] {
        if t.0 < best.0 {
            best = *t;
        }
    }
    best
}

/// Primal cap of the first rule:
/// `(1−2ε)/2 · γ / (γℓ + √((γℓ)² + (2−4ε)/3 · (δ + 6σa²γ²λ)))`, or `+∞` when
/// the root is not real or the denominator is not positive (the quadratic
/// inequality then holds for every positive step).
fn s1_primal_cap(gamma: f64, ell: f64, delta: f64, sigma: f64, a: f64, lam: f64, eps: f64) -> f64 {
    let gl = gamma * ell;
    let radicand = gl * gl + (2.0 - 4.0 * eps) / 3.0 * (delta + 6.0 * sigma * a * a * gamma * gamma * lam);
    if radicand < 0.0 {
        return f64::INFINITY;
    }
    let denom = gl + radicand.sqrt();
    if denom <= 0.0 {
        return f64::INFINITY;
    }
    (1.0 - 2.0 * eps) / 2.0 * gamma / denom
}

/// Growth 3/2, extrapolation 2.
pub fn select_step_s1(
    state: &SolverState,
    problem: &ProblemInstance,
    opts: &SolverOptions,
    ops: &mut OpCounters,
) -> Result<StepDecision, SolverError> {
    let sh = shared_quantities(state, problem, 2.0, ops)?;
    let (sigma, eps, gamma) = (opts.sigma, opts.epsilon, state.gamma_cur);
    let lam_a = finite("lamA", young_quotient(&sh.at_delta_u, &sh.dx, sh.a, 16.0, 4.0))?;
    let lam_b = finite("lamB", young_quotient(&sh.bt_delta_u, &sh.dy, sh.b, 16.0, 4.0))?;
    let gamma_x = s1_primal_cap(gamma, sh.ell_x, sh.delta_x, sigma, sh.a, lam_a, eps);
    let gamma_y = s1_primal_cap(gamma, sh.ell_y, sh.delta_y, sigma, sh.b, lam_b, eps);
    let s = sh.a * sh.a + sh.b * sh.b;
    let dual_cap = if s == 0.0 {
        f64::INFINITY
    } else {
        ((4.0 - lam_a - lam_b - 8.0 * sigma * eps) / (32.0 * sigma * s)).sqrt()
    };
    let growth = 1.5 * gamma;
    let (gamma_next, active_term) = pick([
        (growth, ActiveTerm::Growth),
        (dual_cap, ActiveTerm::DualCap),
        (gamma_x, ActiveTerm::Gx),
        (gamma_y, ActiveTerm::Gy),
    ]);
    finite("gamma_next", gamma_next)?;
    let diag = StepDiagnostics {
        a: sh.a,
        b: sh.b,
        lam_a,
        lam_b,
        mu_a: None,
        mu_b: None,
        ell_x: sh.ell_x,
        ell_y: sh.ell_y,
        lip_x: sh.lip_x,
        lip_y: sh.lip_y,
        delta_x: sh.delta_x,
        delta_y: sh.delta_y,
        gamma_x,
        gamma_y,
        theta: None,
        psi: None,
        growth,
        dual_cap,
        rho: gamma_next / gamma,
    };
    Ok(StepDecision {
        gamma_next,
        delta_u: sh.delta_u,
        at_delta_u: sh.at_delta_u,
        bt_delta_u: sh.bt_delta_u,
        diag,
        active_term,
    })
}

/// `⟨s, Fdiff⟩ / (γ‖s‖²/(2a²) + a²‖Fdiff‖²/(2γ))` where
/// `Fdiff = (x₋ − x) − γ(∇f(x₋) − ∇f(x))`.
fn cross_quotient(s: &[f64], x_prev: &[f64], x_cur: &[f64], g_prev: &[f64], g_cur: &[f64], a: f64, gamma: f64) -> f64 {
    let fdiff: Vec<f64> = (0..x_cur.len())
        .map(|i| (x_prev[i] - x_cur[i]) - gamma * (g_prev[i] - g_cur[i]))
        .collect();
    let a2 = a * a;
    let first = quot(gamma * norm2_sq(s), 2.0 * a2);
    quot(dot(s, &fdiff), first + a2 / (2.0 * gamma) * norm2_sq(&fdiff))
}

/// Growth φ, extrapolation φ, primal caps from the smallest positive root of
/// `σa²μ(δ+1)/γ² t³ + (2φ²σa²λ + δ/γ²) t² + φℓ t − (1−2ε)/2`.
pub fn select_step_s2(
    state: &SolverState,
    problem: &ProblemInstance,
    opts: &SolverOptions,
    ops: &mut OpCounters,
) -> Result<StepDecision, SolverError> {
    let phi = GOLDEN_RATIO;
    let sh = shared_quantities(state, problem, phi, ops)?;
    let (sigma, eps, gamma) = (opts.sigma, opts.epsilon, state.gamma_cur);
    let lam_a = finite("lamA", young_quotient(&sh.at_delta_u, &sh.dx, sh.a, 8.0 * phi, 2.0 * phi))?;
    let lam_b = finite("lamB", young_quotient(&sh.bt_delta_u, &sh.dy, sh.b, 8.0 * phi, 2.0 * phi))?;
    let mu_a = finite(
        "muA",
        cross_quotient(&sh.at_delta_u, &state.x_prev, &state.x_cur, &state.grad_f2_prev, &state.grad_f2_cur, sh.a, gamma),
    )?;
    let mu_b = finite(
        "muB",
        cross_quotient(&sh.bt_delta_u, &state.y_prev, &state.y_cur, &state.grad_g2_prev, &state.grad_g2_cur, sh.b, gamma),
    )?;
    let g2 = gamma * gamma;
    let cap = |a: f64, mu: f64, lam: f64, delta: f64, ell: f64| -> Result<f64, SolverError> {
        let a2 = a * a;
        Ok(smallest_positive_root(
            sigma * a2 * mu * (delta + 1.0) / g2,
            2.0 * phi * phi * sigma * a2 * lam + delta / g2,
            phi * ell,
            -(1.0 - 2.0 * eps) / 2.0,
        )?)
    };
    let gamma_x = cap(sh.a, mu_a, lam_a, sh.delta_x, sh.ell_x)?;
    let gamma_y = cap(sh.b, mu_b, lam_b, sh.delta_y, sh.ell_y)?;
    let s = sh.a * sh.a + sh.b * sh.b;
    let theta = (4.0 - lam_a - lam_b - 8.0 * sigma * eps) / (4.0 * sigma);
    let mu_sum = (mu_a + mu_b) / sigma;
    let psi = mu_sum + (mu_sum * mu_sum + 2.0 * s * theta).sqrt();
    let dual_cap = if psi == 0.0 { f64::INFINITY } else { theta / psi };
    finite("Psi", psi)?;
    let growth = phi * gamma;
    let (gamma_next, active_term) = pick([
        (growth, ActiveTerm::Growth),
        (dual_cap, ActiveTerm::DualCap),
        (gamma_x, ActiveTerm::Gx),
        (gamma_y, ActiveTerm::Gy),
    ]);
    finite("gamma_next", gamma_next)?;
    let diag = StepDiagnostics {
        a: sh.a,
        b: sh.b,
        lam_a,
        lam_b,
        mu_a: Some(mu_a),
        mu_b: Some(mu_b),
        ell_x: sh.ell_x,
        ell_y: sh.ell_y,
        lip_x: sh.lip_x,
        lip_y: sh.lip_y,
        delta_x: sh.delta_x,
        delta_y: sh.delta_y,
        gamma_x,
        gamma_y,
        theta: Some(theta),
        psi: Some(psi),
        growth,
        dual_cap,
        rho: gamma_next / gamma,
    };
    Ok(StepDecision {
        gamma_next,
        delta_u: sh.delta_u,
        at_delta_u: sh.at_delta_u,
        bt_delta_u: sh.bt_delta_u,
        diag,
        active_term,
    })
}

/// Constant stepsize `gamma0` with the first rule's dual direction.
fn select_step_fixed(
    state: &SolverState,
    problem: &ProblemInstance,
    opts: &SolverOptions,
    ops: &mut OpCounters,
) -> Result<StepDecision, SolverError> {
    let delta_u = dual_direction(state, problem, 2.0);
    if !all_finite(&delta_u) {
        return Err(SolverError::NonFinite("dual direction"));
    }
    let at_delta_u = problem.adjoint_a(&delta_u, ops)?;
    let bt_delta_u = problem.adjoint_b(&delta_u, ops)?;
    let du_norm = norm2(&delta_u);
    let diag = StepDiagnostics {
        a: quot(norm2(&at_delta_u), du_norm),
        b: quot(norm2(&bt_delta_u), du_norm),
        gamma_x: f64::INFINITY,
        gamma_y: f64::INFINITY,
        growth: f64::INFINITY,
        dual_cap: f64::INFINITY,
        rho: opts.gamma0 / state.gamma_cur,
        ..StepDiagnostics::default()
    };
    Ok(StepDecision { gamma_next: opts.gamma0, delta_u, at_delta_u, bt_delta_u, diag, active_term: ActiveTerm::Fixed })
}

/// Dispatch on `opts.subroutine`.
pub fn select_step(
    state: &SolverState,
    problem: &ProblemInstance,
    opts: &SolverOptions,
    ops: &mut OpCounters,
) -> Result<StepDecision, SolverError> {
    match opts.subroutine {
        Subroutine::S1 => select_step_s1(state, problem, opts, ops),
        Subroutine::S2 => select_step_s2(state, problem, opts, ops),
        Subroutine::Fixed => select_step_fixed(state, problem, opts, ops),
    }
}
