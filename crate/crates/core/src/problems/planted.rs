//! Random instances with a known saddle point.
//!
//! Pick `x*`, `y*`, `u*` and subgradients `s ∈ ∂f1(x*)`, `t ∈ ∂g1(y*)`, then
//! choose the linear parts of the smooth terms and `c` so that
//!
//! ```text
//! 0 = s + ∇f2(x*) + Aᵀu*,   0 = t + ∇g2(y*) + Bᵀu*,   Ax* + By* = c.
//! ```

use crate::dense::Matrix;
use crate::diagnostics::Saddle;
use crate::funcblocks::{ProxBlock, SmoothBlock};
use crate::linops::LinOp;
use crate::rng::SeededRng;
use crate::solver::ProblemInstance;

use super::ProblemError;

/// Which nonsmooth terms the instance carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlantedKind {
    /// `f1 = g1 = 0`; both smooth terms quadratic.
    Smooth,
    /// `f1` weighted ℓ1 with some zero coordinates in `x*`, `g1` the box
    /// `[−1, 1]` with some active bounds at `y*`.
    L1Box,
}

#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub problem: ProblemInstance,
    pub saddle: Saddle,
    /// Hessians of `f2` and `g2`.
    pub hess_f: Matrix,
    pub hess_g: Matrix,
}

/// `MᵀM · scale / rows` with `M` Gaussian of `rows × n`; singular when
/// `rows < n`.
fn random_psd(rng: &mut SeededRng, n: usize, rows: usize, scale: f64) -> Matrix {
    let m = rng.normal_matrix(rows.max(1), n);
    let g = m.gram();
    let factor = scale / rows.max(1) as f64;
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // symmetrize exactly
            out[(i, j)] = 0.5 * (g[(i, j)] + g[(j, i)]) * factor;
        }
    }
    out
}

pub fn planted_instance(seed: u64, p: usize, q: usize, r: usize, kind: PlantedKind) -> Result<PlantedInstance, ProblemError> {
    if p == 0 || q == 0 || r == 0 {
        return Err(ProblemError::InvalidParameter { name: "dims", reason: format!("need p, q, r >= 1, got {p}, {q}, {r}") });
    }
    let mut rng = SeededRng::new(seed);
    let scale_f = (rng.normal() * 0.7).exp();
    let scale_g = (rng.normal() * 0.7).exp();
    let rows_f = 1 + rng.below(p + 1);
    let rows_g = rng.below(q + 1);
    let hess_f = random_psd(&mut rng, p, rows_f, scale_f);
    let hess_g = if rows_g == 0 { Matrix::zeros(q, q) } else { random_psd(&mut rng, q, rows_g, scale_g) };
    let a_scale = (rng.normal() * 0.5).exp() / (r as f64).sqrt();
    let b_scale = (rng.normal() * 0.5).exp() / (r as f64).sqrt();
    let a = Matrix::from_vec(r, p, rng.normal_vec(r * p).into_iter().map(|v| v * a_scale).collect())?;
    let b = Matrix::from_vec(r, q, rng.normal_vec(r * q).into_iter().map(|v| v * b_scale).collect())?;

    let mut x = rng.normal_vec(p);
    let mut y: Vec<f64> = (0..q).map(|_| rng.uniform_in(-0.9, 0.9)).collect();
    let u = rng.normal_vec(r);
    let mut s = vec![0.0; p];
    let mut t = vec![0.0; q];
    let (f1, g1) = match kind {
        PlantedKind::Smooth => (ProxBlock::zero(p), ProxBlock::zero(q)),
        PlantedKind::L1Box => {
            let w: Vec<f64> = (0..p).map(|_| rng.uniform_in(0.1, 1.0)).collect();
            for i in 0..p {
                if rng.below(3) == 0 {
                    x[i] = 0.0;
                    s[i] = w[i] * rng.uniform_in(-0.9, 0.9);
                } else {
                    s[i] = w[i] * x[i].signum();
                }
            }
            for j in 0..q {
                match rng.below(3) {
                    0 => {
                        y[j] = 1.0;
                        t[j] = rng.exponential();
                    }
                    1 => {
                        y[j] = -1.0;
                        t[j] = -rng.exponential();
                    }
                    _ => {}
                }
            }
            (ProxBlock::l1(w)?, ProxBlock::indicator_box(vec![-1.0; q], vec![1.0; q])?)
        }
    };
    let qx = hess_f.mul_vec(&x);
    let atu = a.mul_vec_t(&u);
    let lin_f: Vec<f64> = (0..p).map(|i| -qx[i] - atu[i] - s[i]).collect();
    let qy = hess_g.mul_vec(&y);
    let btu = b.mul_vec_t(&u);
    let lin_g: Vec<f64> = (0..q).map(|j| -qy[j] - btu[j] - t[j]).collect();
    let ax = a.mul_vec(&x);
    let by = b.mul_vec(&y);
    let c: Vec<f64> = (0..r).map(|i| ax[i] + by[i]).collect();

    let problem = ProblemInstance::new(
        f1,
        SmoothBlock::quadratic(hess_f.clone(), lin_f)?,
        g1,
        SmoothBlock::quadratic(hess_g.clone(), lin_g)?,
        LinOp::dense(a),
        LinOp::dense(b),
        c,
    )?;
    Ok(PlantedInstance { problem, saddle: Saddle { x, y, u }, hess_f, hess_g })
}
