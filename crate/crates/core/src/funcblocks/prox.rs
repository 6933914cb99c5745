use std::ops::Range;

use crate::dense::{self, Matrix};

use super::svd::{jacobi_svd, Svd};
use super::{BlockError, FEASIBILITY_TOL};

/// `W ↦ ½‖Y − ΦW‖²_F` over row-major `W` of shape `n × k`, with the
/// eigendecomposition of `ΦᵀΦ` cached so each prox is two small products.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresTerm {
    phi: Matrix,
    targets: Matrix,
    phi_t_y: Matrix,
    eigvecs: Matrix,
    eigvals: Vec<f64>,
}

impl LeastSquaresTerm {
    pub fn new(phi: Matrix, targets: Matrix) -> Result<Self, BlockError> {
        if phi.rows() != targets.rows() {
            return Err(BlockError::DimensionMismatch { expected: phi.rows(), actual: targets.rows() });
        }
        let phi_t_y = phi.transpose().matmul(&targets).map_err(|e| BlockError::Operator(e.to_string()))?;
        let Svd { s, v, .. } = jacobi_svd(&phi.gram())?;
        Ok(Self { phi, targets, phi_t_y, eigvecs: v, eigvals: s })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.phi.cols(), self.targets.cols())
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (n, k) = self.shape();
        let w = Matrix::from_vec(n, k, x.to_vec()).expect("dimension checked by caller");
        let pw = self.phi.matmul(&w).expect("shapes fixed at construction");
        let mut acc = 0.0;
        for (a, b) in pw.as_slice().iter().zip(self.targets.as_slice()) {
            acc += (a - b) * (a - b);
        }
        0.5 * acc
    }

    /// Solves `(ΦᵀΦ + I/α) W = ΦᵀY + V/α`.
    fn prox(&self, v: &[f64], alpha: f64) -> Vec<f64> {
        let (n, k) = self.shape();
        let inv = 1.0 / alpha;
        let mut rhs = self.phi_t_y.clone();
        for i in 0..n {
            for j in 0..k {
                rhs[(i, j)] += inv * v[i * k + j];
            }
        }
        let vt = self.eigvecs.transpose();
        let mut t = vt.matmul(&rhs).expect("square eigenbasis");
        for i in 0..n {
            let d = 1.0 / (self.eigvals[i] + inv);
            for j in 0..k {
                t[(i, j)] *= d;
            }
        }
        self.eigvecs.matmul(&t).expect("square eigenbasis").into_vec()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Zero,
    L1(Vec<f64>),
    NonnegL1(Vec<f64>),
    Box { lo: Vec<f64>, hi: Vec<f64> },
    LinfBall(f64),
    Nonneg,
    Hyperplane { normal: Vec<f64>, norm_sq: f64 },
    WeightedNuclear { weights: Vec<f64>, rows: usize, cols: usize },
    LeastSquares(Box<LeastSquaresTerm>),
    SeparableSum(Vec<(Range<usize>, ProxBlock)>),
}

/// A closed convex term accessed through its proximal map.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxBlock {
    kind: Kind,
    dim: usize,
}

fn check_weights(w: &[f64]) -> Result<(), BlockError> {
    for (index, &value) in w.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(BlockError::NegativeWeight { index, value });
        }
    }
    Ok(())
}

impl ProxBlock {
    pub fn zero(dim: usize) -> Self {
        Self { kind: Kind::Zero, dim }
    }

    /// `x ↦ Σ wᵢ|xᵢ|`.
    pub fn l1(weights: Vec<f64>) -> Result<Self, BlockError> {
        check_weights(&weights)?;
        let dim = weights.len();
        Ok(Self { kind: Kind::L1(weights), dim })
    }

    /// `x ↦ Σ wᵢxᵢ` restricted to `x ≥ 0`.
    pub fn nonneg_l1(weights: Vec<f64>) -> Result<Self, BlockError> {
        check_weights(&weights)?;
        let dim = weights.len();
        Ok(Self { kind: Kind::NonnegL1(weights), dim })
    }

    /// Indicator of `lo ≤ x ≤ hi`.
    pub fn indicator_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, BlockError> {
        if lo.len() != hi.len() {
            return Err(BlockError::DimensionMismatch { expected: lo.len(), actual: hi.len() });
        }
        for (index, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l <= h) {
                return Err(BlockError::EmptyBox { index });
            }
        }
        let dim = lo.len();
        Ok(Self { kind: Kind::Box { lo, hi }, dim })
    }

    /// Indicator of `‖x‖∞ ≤ radius`.
    pub fn indicator_linf_ball(dim: usize, radius: f64) -> Result<Self, BlockError> {
        if !(radius >= 0.0) {
            return Err(BlockError::NegativeRadius(radius));
        }
        Ok(Self { kind: Kind::LinfBall(radius), dim })
    }

    pub fn indicator_nonneg(dim: usize) -> Self {
        Self { kind: Kind::Nonneg, dim }
    }

    /// Indicator of `{x : ⟨normal, x⟩ = 0}`.
    pub fn indicator_hyperplane(normal: Vec<f64>) -> Result<Self, BlockError> {
        let norm_sq = dense::norm2_sq(&normal);
        if norm_sq == 0.0 {
            return Err(BlockError::ZeroNormal);
        }
        let dim = normal.len();
        Ok(Self { kind: Kind::Hyperplane { normal, norm_sq }, dim })
    }

    /// `W ↦ Σ bᵢ σᵢ(W)` over row-major `rows × cols` matrices, with one
    /// weight per singular value. Nonincreasing weights give a convex
    /// function; other orderings are accepted and reported by
    /// [`ProxBlock::has_nonmonotone_weights`].
    pub fn weighted_nuclear(weights: Vec<f64>, rows: usize, cols: usize) -> Result<Self, BlockError> {
        check_weights(&weights)?;
        if rows == 0 || cols == 0 || weights.len() != rows.min(cols) {
            return Err(BlockError::NuclearShape { rows, cols, weights: weights.len() });
        }
        Ok(Self { kind: Kind::WeightedNuclear { weights, rows, cols }, dim: rows * cols })
    }

    pub fn least_squares(term: LeastSquaresTerm) -> Self {
        let (n, k) = term.shape();
        Self { kind: Kind::LeastSquares(Box::new(term)), dim: n * k }
    }

    /// Childwise sum over slices that must partition `[0, dim)`.
    pub fn separable_sum(dim: usize, mut parts: Vec<(Range<usize>, ProxBlock)>) -> Result<Self, BlockError> {
        parts.sort_by_key(|(r, _)| r.start);
        let mut cursor = 0;
        for (r, b) in &parts {
            if r.start < cursor {
                return Err(BlockError::Partition(format!("slice {r:?} overlaps the previous slice ending at {cursor}")));
            }
            if r.start > cursor {
                return Err(BlockError::Partition(format!("gap between {cursor} and {}", r.start)));
            }
            if r.end < r.start || r.end - r.start != b.dim {
                return Err(BlockError::Partition(format!("slice {r:?} does not match child dimension {}", b.dim)));
            }
            cursor = r.end;
        }
        if cursor != dim {
            return Err(BlockError::Partition(format!("slices cover [0, {cursor}) but dimension is {dim}")));
        }
        Ok(Self { kind: Kind::SeparableSum(parts), dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero)
    }

    /// True when some weighted-nuclear block (possibly nested) has weights
    /// that increase somewhere, so convexity is not guaranteed.
    pub fn has_nonmonotone_weights(&self) -> bool {
        match &self.kind {
            Kind::WeightedNuclear { weights, .. } => weights.windows(2).any(|w| w[1] > w[0]),
            Kind::SeparableSum(parts) => parts.iter().any(|(_, b)| b.has_nonmonotone_weights()),
            _ => false,
        }
    }

    fn check(&self, x: &[f64]) -> Result<(), BlockError> {
        if x.len() != self.dim {
            return Err(BlockError::DimensionMismatch { expected: self.dim, actual: x.len() });
        }
        Ok(())
    }

    /// Function value; indicators give `0` within the feasibility tolerance
    /// (∞-norm distance `1e-9`) and `+∞` beyond it.
    pub fn value(&self, x: &[f64]) -> Result<f64, BlockError> {
        self.check(x)?;
        let tol = FEASIBILITY_TOL;
        let indicator = |ok: bool| if ok { 0.0 } else { f64::INFINITY };
        Ok(match &self.kind {
            Kind::Zero => 0.0,
            Kind::L1(w) => w.iter().zip(x).map(|(w, x)| w * x.abs()).sum(),
            Kind::NonnegL1(w) => {
                if x.iter().all(|v| *v >= -tol) {
                    w.iter().zip(x).map(|(w, x)| w * x.abs()).sum()
                } else {
                    f64::INFINITY
                }
            }
            Kind::Box { lo, hi } => indicator(x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *v >= l - tol && *v <= h + tol)),
            Kind::LinfBall(r) => indicator(dense::norm_inf(x) <= r + tol),
            Kind::Nonneg => indicator(x.iter().all(|v| *v >= -tol)),
            Kind::Hyperplane { normal, norm_sq } => {
                let offset = dense::dot(normal, x).abs() / norm_sq * dense::norm_inf(normal);
                indicator(offset <= tol)
            }
            Kind::WeightedNuclear { weights, rows, cols } => {
                let m = Matrix::from_vec(*rows, *cols, x.to_vec()).expect("dimension checked");
                let svd = jacobi_svd(&m)?;
                weights.iter().zip(&svd.s).map(|(b, s)| b * s).sum()
            }
            Kind::LeastSquares(t) => t.value(x),
            Kind::SeparableSum(parts) => {
                let mut acc = 0.0;
                for (r, b) in parts {
                    acc += b.value(&x[r.clone()])?;
                }
                acc
            }
        })
    }

    /// `argmin_z self(z) + ‖z − v‖² / (2 alpha)`.
    pub fn prox(&self, v: &[f64], alpha: f64) -> Result<Vec<f64>, BlockError> {
        self.check(v)?;
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(BlockError::NonPositiveStep(alpha));
        }
        Ok(match &self.kind {
            Kind::Zero => v.to_vec(),
            Kind::L1(w) => v
                .iter()
                .zip(w)
                .map(|(v, w)| v.signum() * (v.abs() - alpha * w).max(0.0))
                .collect(),
            Kind::NonnegL1(w) => v.iter().zip(w).map(|(v, w)| (v - alpha * w).max(0.0)).collect(),
            Kind::Box { lo, hi } => v.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| v.max(*l).min(*h)).collect(),
            Kind::LinfBall(r) => v.iter().map(|v| v.max(-r).min(*r)).collect(),
            Kind::Nonneg => v.iter().map(|v| v.max(0.0)).collect(),
            Kind::Hyperplane { normal, norm_sq } => {
                let t = dense::dot(normal, v) / norm_sq;
                v.iter().zip(normal).map(|(v, n)| v - t * n).collect()
            }
            Kind::WeightedNuclear { weights, rows, cols } => {
                let m = Matrix::from_vec(*rows, *cols, v.to_vec()).expect("dimension checked");
                let mut svd = jacobi_svd(&m)?;
                let mut shifted: Vec<f64> = svd.s.iter().zip(weights).map(|(s, b)| s - alpha * b).collect();
                if !weights.windows(2).any(|w| w[1] > w[0]) {
                    // the shifted values can lose their order; the exact
                    // minimizer is their nonincreasing least-squares fit
                    nonincreasing_fit(&mut shifted);
                }
                for (s, t) in svd.s.iter_mut().zip(shifted) {
                    *s = t.max(0.0);
                }
                svd.reconstruct().into_vec()
            }
            Kind::LeastSquares(t) => t.prox(v, alpha),
            Kind::SeparableSum(parts) => {
                let mut out = vec![0.0; self.dim];
                for (r, b) in parts {
                    let p = b.prox(&v[r.clone()], alpha)?;
                    out[r.clone()].copy_from_slice(&p);
                }
                out
            }
        })
    }
}

/// In-place least-squares projection onto nonincreasing sequences (pool
/// adjacent violators).
fn nonincreasing_fit(v: &mut [f64]) {
    // (sum, count) per pooled block
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(v.len());
    for &x in v.iter() {
        blocks.push((x, 1));
        while blocks.len() > 1 {
            let (s1, n1) = blocks[blocks.len() - 1];
            let (s0, n0) = blocks[blocks.len() - 2];
            if s0 / n0 as f64 >= s1 / n1 as f64 {
                break;
            }
            blocks.pop();
            *blocks.last_mut().expect("two blocks present") = (s0 + s1, n0 + n1);
        }
    }
    let mut i = 0;
    for (s, n) in blocks {
        let mean = s / n as f64;
        for x in &mut v[i..i + n] {
            *x = mean;
        }
        i += n;
    }
}
