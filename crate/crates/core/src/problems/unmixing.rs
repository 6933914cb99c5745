//! Sparse and low-rank abundance estimation
//!
//! ```text
//! min_W ½‖Y − ΦW‖²_F + γ Σ a_ij |w_ij| + τ Σ b_i σ_i(W) + δ(W ≥ 0)
//! ```
//!
//! split into copies of `W` tied to a consensus variable.

use crate::dense::{self, Matrix};
use crate::funcblocks::{jacobi_svd, LeastSquaresTerm, ProxBlock, SmoothBlock, Svd, FEASIBILITY_TOL};
use crate::linops::LinOp;
use crate::rng::SeededRng;
use crate::solver::ProblemInstance;

use super::ProblemError;

/// Added to magnitudes before inverting them into weights.
const WEIGHT_OFFSET: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq)]
pub struct UnmixingData {
    /// Dictionary, `L × N`, nonnegative.
    pub phi: Matrix,
    /// Planted abundances, `N × K`, columns on the simplex.
    pub w0: Matrix,
    /// Observations `ΦW0 + noise`, `L × K`.
    pub y: Matrix,
    /// `a_ij = 1/(|w^LS_ij| + 1e-16)`, `N × K`.
    pub a_weights: Matrix,
    /// Constant, `min(N, K)` entries.
    pub b_weights: Vec<f64>,
}

impl UnmixingData {
    /// `(L, N, K)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.phi.rows(), self.phi.cols(), self.y.cols())
    }

    /// The unsplit objective at row-major `w` (`N × K`); `+∞` off the
    /// nonnegative orthant.
    pub fn objective(&self, gamma: f64, tau: f64, w: &[f64]) -> Result<f64, ProblemError> {
        let (_, n, k) = self.dims();
        if w.iter().any(|v| *v < -FEASIBILITY_TOL) {
            return Ok(f64::INFINITY);
        }
        let wm = Matrix::from_vec(n, k, w.to_vec())?;
        let fit = self.phi.matmul(&wm)?;
        let misfit: f64 = fit.as_slice().iter().zip(self.y.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
        let sparse: f64 = self.a_weights.as_slice().iter().zip(w).map(|(a, v)| a * v.abs()).sum();
        let Svd { s, .. } = jacobi_svd(&wm)?;
        let rank: f64 = self.b_weights.iter().zip(&s).map(|(b, s)| b * s).sum();
        Ok(0.5 * misfit + gamma * sparse + tau * rank)
    }
}

/// `Φ⁺Y` through the thin SVD of `Φ`, dropping singular values below
/// `1e-12·σ_max`.
fn least_squares_estimate(phi: &Matrix, y: &Matrix) -> Result<Matrix, ProblemError> {
    let Svd { u, s, v } = jacobi_svd(phi)?;
    let cutoff = 1e-12 * s.first().copied().unwrap_or(0.0);
    let mut uty = u.transpose().matmul(y)?;
    for (i, si) in s.iter().enumerate() {
        let inv = if *si > cutoff { 1.0 / si } else { 0.0 };
        for j in 0..uty.cols() {
            uty[(i, j)] *= inv;
        }
    }
    Ok(v.matmul(&uty)?)
}

/// Seeded synthetic data. `Φ` has uniform `[0, 1)` entries, each column of
/// `W0` is a normalized vector of i.i.d. exponentials, and Gaussian noise
/// (Box–Muller) is scaled so that `10·log10(mean signal power / noise
/// variance) = snr_db`; `snr_db = +∞` adds none.
pub fn synth_unmixing(seed: u64, l: usize, n: usize, k: usize, snr_db: f64) -> Result<UnmixingData, ProblemError> {
    if n == 0 || k == 0 || l < n {
        return Err(ProblemError::InvalidParameter {
            name: "dims",
            reason: format!("need L >= N >= 1 and K >= 1, got L={l}, N={n}, K={k}"),
        });
    }
    if snr_db.is_nan() {
        return Err(ProblemError::InvalidParameter { name: "snr_db", reason: "must not be NaN".into() });
    }
    let mut rng = SeededRng::new(seed);
    let phi = Matrix::from_vec(l, n, (0..l * n).map(|_| rng.uniform()).collect())?;
    let mut w0 = Matrix::zeros(n, k);
    for j in 0..k {
        let draws: Vec<f64> = (0..n).map(|_| rng.exponential()).collect();
        let total: f64 = draws.iter().sum();
        for i in 0..n {
            w0[(i, j)] = draws[i] / total;
        }
    }
    let mut y = phi.matmul(&w0)?;
    if snr_db.is_finite() {
        let power = dense::norm2_sq(y.as_slice()) / (l * k) as f64;
        let std = (power / 10f64.powf(snr_db / 10.0)).sqrt();
        for i in 0..l {
            for j in 0..k {
                y[(i, j)] += std * rng.normal();
            }
        }
    }
    let w_ls = least_squares_estimate(&phi, &y)?;
    let a_weights = Matrix::from_vec(n, k, w_ls.as_slice().iter().map(|w| 1.0 / (w.abs() + WEIGHT_OFFSET)).collect())?;
    let Svd { s, .. } = jacobi_svd(&w_ls)?;
    let b = s.iter().map(|s| 1.0 / (s + WEIGHT_OFFSET)).sum::<f64>() / s.len() as f64;
    Ok(UnmixingData { phi, w0, y, a_weights, b_weights: vec![b; n.min(k)] })
}

/// Which split to build and the regularization weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    /// 2, 3 or 4.
    pub n_blocks: usize,
    /// `(L, N, K)`.
    pub dims: (usize, usize, usize),
    pub gamma: f64,
    pub tau: f64,
    pub a_weights: Matrix,
    pub b_weights: Vec<f64>,
}

impl BlockSpec {
    pub fn new(
        n_blocks: usize,
        dims: (usize, usize, usize),
        gamma: f64,
        tau: f64,
        a_weights: Matrix,
        b_weights: Vec<f64>,
    ) -> Result<Self, ProblemError> {
        let bad = |name, reason: String| Err(ProblemError::InvalidParameter { name, reason });
        if !(2..=4).contains(&n_blocks) {
            return bad("n_blocks", format!("must be 2, 3 or 4, got {n_blocks}"));
        }
        if !(gamma >= 0.0) || !(tau >= 0.0) {
            return bad("gamma/tau", format!("must be nonnegative, got {gamma} and {tau}"));
        }
        let (_, n, k) = dims;
        if a_weights.shape() != (n, k) {
            return bad("a_weights", format!("expected shape {:?}, got {:?}", (n, k), a_weights.shape()));
        }
        if b_weights.len() != n.min(k) {
            return bad("b_weights", format!("expected {} entries, got {}", n.min(k), b_weights.len()));
        }
        if a_weights.as_slice().iter().chain(&b_weights).any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return bad("weights", "must be nonnegative and finite".into());
        }
        Ok(Self { n_blocks, dims, gamma, tau, a_weights, b_weights })
    }

    pub fn from_data(n_blocks: usize, gamma: f64, tau: f64, data: &UnmixingData) -> Result<Self, ProblemError> {
        Self::new(n_blocks, data.dims(), gamma, tau, data.a_weights.clone(), data.b_weights.clone())
    }

    /// Nonincreasing rank weights make the weighted nuclear norm convex.
    pub fn is_convex(&self) -> bool {
        self.b_weights.windows(2).all(|w| w[1] <= w[0])
    }
}

/// `½‖Y − ΦW‖²` as a quadratic over row-major `W`, constant dropped:
/// Hessian `ΦᵀΦ ⊗ I_K`, linear part `−ΦᵀY`.
fn misfit_quadratic(data: &UnmixingData) -> Result<SmoothBlock, ProblemError> {
    let (_, n, k) = data.dims();
    let gram = data.phi.gram();
    let mut h = Matrix::zeros(n * k, n * k);
    for i in 0..n {
        for i2 in 0..n {
            for j in 0..k {
                h[(i * k + j, i2 * k + j)] = gram[(i, i2)];
            }
        }
    }
    let pty = data.phi.transpose().matmul(&data.y)?;
    let lin = pty.as_slice().iter().map(|v| -v).collect();
    Ok(SmoothBlock::quadratic(h, lin)?)
}

/// Maps a split onto the two-block template with `x` the stacked copies of
/// `W`, `y = Z` the consensus variable, `A = I`, `B` a stack of `−I` and
/// `c = 0`.
///
/// * 2 blocks: `f2` = misfit, `f1` = nonnegative weighted ℓ1, `g1` = nuclear.
/// * 3 blocks: `f1` = misfit ⊕ nonnegative weighted ℓ1, `g1` = nuclear.
/// * 4 blocks: `f1` = misfit ⊕ nonnegative weighted ℓ1 ⊕ nuclear, `g1 = 0`.
///
/// The 2-block misfit drops the constant `½‖Y‖²`; the prox-form misfit keeps it.
pub fn build_consensus(spec: &BlockSpec, data: &UnmixingData) -> Result<ProblemInstance, ProblemError> {
    if spec.dims != data.dims() {
        return Err(ProblemError::InvalidParameter {
            name: "dims",
            reason: format!("spec has {:?}, data has {:?}", spec.dims, data.dims()),
        });
    }
    let (_, n, k) = spec.dims;
    let d = n * k;
    let sparse = || ProxBlock::nonneg_l1(spec.a_weights.as_slice().iter().map(|a| spec.gamma * a).collect());
    let nuclear = || ProxBlock::weighted_nuclear(spec.b_weights.iter().map(|b| spec.tau * b).collect(), n, k);
    let misfit = || -> Result<ProxBlock, ProblemError> {
        Ok(ProxBlock::least_squares(LeastSquaresTerm::new(data.phi.clone(), data.y.clone())?))
    };
    let copies = spec.n_blocks - 1;
    let (f1, f2, g1) = match spec.n_blocks {
        2 => (sparse()?, misfit_quadratic(data)?, nuclear()?),
        3 => (
            ProxBlock::separable_sum(2 * d, vec![(0..d, misfit()?), (d..2 * d, sparse()?)])?,
            SmoothBlock::zero(2 * d),
            nuclear()?,
        ),
        _ => (
            ProxBlock::separable_sum(3 * d, vec![(0..d, misfit()?), (d..2 * d, sparse()?), (2 * d..3 * d, nuclear()?)])?,
            SmoothBlock::zero(3 * d),
            ProxBlock::zero(d),
        ),
    };
    let b = LinOp::vstack((0..copies).map(|_| LinOp::scaled(-1.0, LinOp::identity(d))).collect())?;
    Ok(ProblemInstance::new(
        f1,
        f2,
        g1,
        SmoothBlock::zero(d),
        LinOp::identity(copies * d),
        b,
        vec![0.0; copies * d],
    )?)
}
