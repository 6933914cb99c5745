//! Fixed-step oracles that share no code with the adaptive solver.

use crate::dense::{norm_inf, sub};
use crate::funcblocks::{ProxBlock, SmoothBlock};
use crate::linops::{operator_norm, LinOp, LinOpError};
use crate::solver::ProblemInstance;

use super::{DiagnosticsError, ResidualReport, Saddle};

/// Largest `p + q + r` accepted by [`reference_solve`].
pub const REFERENCE_DIM_CAP: usize = 200;

fn norm_or_estimate(op: &LinOp) -> Result<f64, DiagnosticsError> {
    match operator_norm(op, 1e-12, 20_000, 0xacc0) {
        Ok(v) => Ok(v),
        Err(LinOpError::NotConverged { last_estimate, .. }) => Ok(last_estimate),
        Err(e) => Err(e.into()),
    }
}

/// A saddle point of the two-block problem, computed by the primal-dual
/// splitting iteration on `z = (x, y)` with `K = [A B]`:
///
/// ```text
/// z⁺ = prox_{α(f1⊕g1)}(z − α∇(f2⊕g2)(z) − αKᵀu)
/// u⁺ = u + β(K(2z⁺ − z) − c)
/// ```
///
/// Runs until every residual is below `tol` in ∞-norm and the stopping rule
/// passes at `(1e-8, 1e-10)`. Errors when that does not happen within
/// `max_iters`, which includes problems with no saddle.
pub fn reference_solve(problem: &ProblemInstance, max_iters: usize, tol: f64) -> Result<Saddle, DiagnosticsError> {
    let (p, q, r) = problem.dims();
    if p + q + r > REFERENCE_DIM_CAP {
        return Err(DiagnosticsError::TooLarge { dim: p + q + r, cap: REFERENCE_DIM_CAP });
    }
    let lip = problem.f2().lipschitz_bound()?.max(problem.g2().lipschitz_bound()?);
    let na = norm_or_estimate(problem.a())?;
    let nb = norm_or_estimate(problem.b())?;
    // small inflation covers power-iteration underestimates
    let k_norm = (na * na + nb * nb).sqrt() * 1.001;
    let beta = if k_norm > 0.0 { 1.0 / k_norm } else { 1.0 };
    let denom = lip / 2.0 + beta * k_norm * k_norm;
    let alpha = if denom > 0.0 { 0.99 / denom } else { 1.0 };

    let c = problem.c();
    let (a, b) = (problem.a(), problem.b());
    let mut x = vec![0.0; p];
    let mut y = vec![0.0; q];
    let mut u = vec![0.0; r];
    let mut gx = problem.f2().grad(&x)?;
    let mut gy = problem.g2().grad(&y)?;
    let mut kz: Vec<f64> = a.apply(&x)?.iter().zip(b.apply(&y)?).map(|(s, t)| s + t).collect();
    let mut at_u = a.apply_adjoint(&u)?;
    let mut bt_u = b.apply_adjoint(&u)?;
    let mut last = f64::INFINITY;

    for _ in 0..max_iters {
        let vx: Vec<f64> = (0..p).map(|i| x[i] - alpha * (gx[i] + at_u[i])).collect();
        let vy: Vec<f64> = (0..q).map(|i| y[i] - alpha * (gy[i] + bt_u[i])).collect();
        let x_next = problem.f1().prox(&vx, alpha)?;
        let y_next = problem.g1().prox(&vy, alpha)?;
        let kz_next: Vec<f64> = a.apply(&x_next)?.iter().zip(b.apply(&y_next)?).map(|(s, t)| s + t).collect();
        let u_next: Vec<f64> = (0..r).map(|i| u[i] + beta * (2.0 * kz_next[i] - kz[i] - c[i])).collect();
        let at_next = a.apply_adjoint(&u_next)?;
        let bt_next = b.apply_adjoint(&u_next)?;
        let gx_next = problem.f2().grad(&x_next)?;
        let gy_next = problem.g2().grad(&y_next)?;

        let w1: Vec<f64> = (0..p)
            .map(|i| (x[i] - x_next[i]) / alpha - gx[i] + gx_next[i] - at_u[i] + at_next[i])
            .collect();
        let w2: Vec<f64> = (0..q)
            .map(|i| (y[i] - y_next[i]) / alpha - gy[i] + gy_next[i] - bt_u[i] + bt_next[i])
            .collect();
        let w3: Vec<f64> = (0..r).map(|i| kz_next[i] - c[i]).collect();
        let report = ResidualReport::from_vectors(w1, w2, w3);
        let norms = report.norms();
        last = norms.max_inf();
        if !norms.is_finite() {
            break;
        }

        x = x_next;
        y = y_next;
        u = u_next;
        gx = gx_next;
        gy = gy_next;
        kz = kz_next;
        at_u = at_next;
        bt_u = bt_next;
        if norms.max_inf() <= tol && norms.passes(1e-8, 1e-10) {
            return Ok(Saddle { x, y, u });
        }
    }
    Err(DiagnosticsError::NotConverged { iters: max_iters, residual: last })
}

/// `iters` steps of `x⁺ = prox_{αg}(x − α∇f(x))`, returning every iterate
/// starting with `x0`.
pub fn proximal_gradient(
    f: &SmoothBlock,
    g: &ProxBlock,
    x0: &[f64],
    step: f64,
    iters: usize,
) -> Result<Vec<Vec<f64>>, DiagnosticsError> {
    let mut out = Vec::with_capacity(iters + 1);
    out.push(x0.to_vec());
    let mut x = x0.to_vec();
    for _ in 0..iters {
        let grad = f.grad(&x)?;
        let v: Vec<f64> = x.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
        x = g.prox(&v, step)?;
        out.push(x.clone());
    }
    Ok(out)
}

/// Proximal gradient run until `‖x⁺ − x‖∞ / step ≤ tol`.
pub fn proximal_gradient_solve(
    f: &SmoothBlock,
    g: &ProxBlock,
    x0: &[f64],
    step: f64,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<f64>, DiagnosticsError> {
    let mut x = x0.to_vec();
    let mut last = f64::INFINITY;
    for _ in 0..max_iters {
        let grad = f.grad(&x)?;
        let v: Vec<f64> = x.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
        let next = g.prox(&v, step)?;
        last = norm_inf(&sub(&next, &x)) / step;
        x = next;
        if last <= tol {
            return Ok(x);
        }
    }
    Err(DiagnosticsError::NotConverged { iters: max_iters, residual: last })
}
