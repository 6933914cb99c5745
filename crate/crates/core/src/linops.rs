//! Linear operators for the coupling constraint `Ax + By = c`.

use thiserror::Error;

use crate::dense::{self, Matrix};
use crate::rng::SeededRng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinOpError {
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("stacked operators disagree on {what}: {expected} vs {actual}")]
    InconsistentBlocks { what: &'static str, expected: usize, actual: usize },
    #[error("power iteration did not converge in {iters} iterations (last estimate {last_estimate})")]
    NotConverged { last_estimate: f64, iters: usize },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Dense(Matrix),
    Identity,
    Zero,
    Scaled(f64, Box<LinOp>),
    VStack(Vec<LinOp>),
    BlockDiag(Vec<LinOp>),
    RowVector(Vec<f64>),
}

/// An immutable linear map `R^cols -> R^rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinOp {
    kind: Kind,
    rows: usize,
    cols: usize,
}

impl LinOp {
    pub fn dense(m: Matrix) -> Self {
        let (rows, cols) = m.shape();
        Self { kind: Kind::Dense(m), rows, cols }
    }

    pub fn identity(n: usize) -> Self {
        Self { kind: Kind::Identity, rows: n, cols: n }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self { kind: Kind::Zero, rows, cols }
    }

    pub fn scaled(alpha: f64, op: LinOp) -> Self {
        let (rows, cols) = (op.rows, op.cols);
        Self { kind: Kind::Scaled(alpha, Box::new(op)), rows, cols }
    }

    /// `[A1; A2; ...]`, all blocks sharing the column count.
    pub fn vstack(blocks: Vec<LinOp>) -> Result<Self, LinOpError> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        for b in &blocks {
            if b.cols != cols {
                return Err(LinOpError::InconsistentBlocks { what: "columns", expected: cols, actual: b.cols });
            }
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        Ok(Self { kind: Kind::VStack(blocks), rows, cols })
    }

    pub fn block_diag(blocks: Vec<LinOp>) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        Self { kind: Kind::BlockDiag(blocks), rows, cols }
    }

    /// The `1 × n` operator `v ↦ ⟨coeffs, v⟩`.
    pub fn row_vector(coeffs: Vec<f64>) -> Self {
        let cols = coeffs.len();
        Self { kind: Kind::RowVector(coeffs), rows: 1, cols }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            Kind::Zero => true,
            Kind::Dense(m) => m.as_slice().iter().all(|v| *v == 0.0),
            Kind::Identity => self.rows == 0,
            Kind::Scaled(a, op) => *a == 0.0 || op.is_zero(),
            Kind::VStack(bs) | Kind::BlockDiag(bs) => bs.iter().all(LinOp::is_zero),
            Kind::RowVector(c) => c.iter().all(|v| *v == 0.0),
        }
    }

    /// True for the negated identity `-I`.
    pub fn is_negative_identity(&self) -> bool {
        match &self.kind {
            Kind::Scaled(a, op) => *a == -1.0 && matches!(op.kind, Kind::Identity),
            Kind::Dense(m) => {
                m.rows() == m.cols()
                    && (0..m.rows()).all(|i| (0..m.cols()).all(|j| m[(i, j)] == if i == j { -1.0 } else { 0.0 }))
            }
            _ => false,
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>, LinOpError> {
        if v.len() != self.cols {
            return Err(LinOpError::DimensionMismatch { expected: self.cols, actual: v.len() });
        }
        Ok(self.apply_unchecked(v))
    }

    pub fn apply_adjoint(&self, w: &[f64]) -> Result<Vec<f64>, LinOpError> {
        if w.len() != self.rows {
            return Err(LinOpError::DimensionMismatch { expected: self.rows, actual: w.len() });
        }
        Ok(self.adjoint_unchecked(w))
    }

    fn apply_unchecked(&self, v: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Dense(m) => m.mul_vec(v),
            Kind::Identity => v.to_vec(),
            Kind::Zero => vec![0.0; self.rows],
            Kind::Scaled(a, op) => dense::scale(*a, &op.apply_unchecked(v)),
            Kind::VStack(bs) => bs.iter().flat_map(|b| b.apply_unchecked(v)).collect(),
            Kind::BlockDiag(bs) => {
                let mut out = Vec::with_capacity(self.rows);
                let mut start = 0;
                for b in bs {
                    out.extend(b.apply_unchecked(&v[start..start + b.cols]));
                    start += b.cols;
                }
                out
            }
            Kind::RowVector(c) => vec![dense::dot(c, v)],
        }
    }

    fn adjoint_unchecked(&self, w: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Dense(m) => m.mul_vec_t(w),
            Kind::Identity => w.to_vec(),
            Kind::Zero => vec![0.0; self.cols],
            Kind::Scaled(a, op) => dense::scale(*a, &op.adjoint_unchecked(w)),
            Kind::VStack(bs) => {
                let mut out = vec![0.0; self.cols];
                let mut start = 0;
                for b in bs {
                    let part = b.adjoint_unchecked(&w[start..start + b.rows]);
                    dense::axpy(1.0, &part, &mut out);
                    start += b.rows;
                }
                out
            }
            Kind::BlockDiag(bs) => {
                let mut out = Vec::with_capacity(self.cols);
                let mut start = 0;
                for b in bs {
                    out.extend(b.adjoint_unchecked(&w[start..start + b.rows]));
                    start += b.rows;
                }
                out
            }
            Kind::RowVector(c) => dense::scale(w[0], c),
        }
    }

    /// Materialize as a dense matrix (column by column).
    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        let mut e = vec![0.0; self.cols];
        for j in 0..self.cols {
            e[j] = 1.0;
            let col = self.apply_unchecked(&e);
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
            e[j] = 0.0;
        }
        m
    }
}

/// Largest singular value by power iteration on `op ∘ opᵀ`.
///
/// The start vector is a unit vector drawn from [`SeededRng`] with `seed`.
/// Each step reports `‖opᵀ w‖` for the current unit `w`; iteration stops when
/// two consecutive estimates agree to relative `tol`. An operator with no
/// nonzero entries yields `0`.
pub fn operator_norm(op: &LinOp, tol: f64, max_iters: usize, seed: u64) -> Result<f64, LinOpError> {
    if !(tol > 0.0) {
        return Err(LinOpError::BadTolerance(tol));
    }
    if op.rows == 0 || op.cols == 0 || op.is_zero() {
        return Ok(0.0);
    }
    let mut rng = SeededRng::new(seed);
    let mut w = rng.unit_vector(op.rows);
    let mut estimate = 0.0;
    for _ in 0..max_iters {
        let atw = op.adjoint_unchecked(&w);
        let next_estimate = dense::norm2(&atw);
        let aatw = op.apply_unchecked(&atw);
        let nrm = dense::norm2(&aatw);
        if nrm == 0.0 {
            return Ok(next_estimate);
        }
        let converged = (next_estimate - estimate).abs() <= tol * next_estimate;
        estimate = next_estimate;
        if converged {
            return Ok(estimate);
        }
        w = dense::scale(1.0 / nrm, &aatw);
    }
    Err(LinOpError::NotConverged { last_estimate: estimate, iters: max_iters })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_examples() {
        assert_eq!(LinOp::identity(3).apply(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let d = LinOp::dense(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
        assert_eq!(d.apply(&[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
        let s = LinOp::vstack(vec![LinOp::identity(1), LinOp::scaled(2.0, LinOp::identity(1))]).unwrap();
        assert_eq!(s.apply(&[1.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn adjoint_examples() {
        let d = LinOp::dense(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
        assert_eq!(d.apply_adjoint(&[1.0, 0.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(LinOp::zero(2, 3).apply_adjoint(&[5.0, 5.0]).unwrap(), vec![0.0, 0.0, 0.0]);
        let s = LinOp::vstack(vec![LinOp::identity(2), LinOp::identity(2)]).unwrap();
        assert_eq!(s.apply_adjoint(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![4.0, 6.0]);
    }

    #[test]
    fn dimension_errors_name_lengths() {
        let err = LinOp::identity(3).apply(&[1.0]).unwrap_err();
        assert_eq!(err, LinOpError::DimensionMismatch { expected: 3, actual: 1 });
        let err = LinOp::zero(2, 3).apply_adjoint(&[1.0]).unwrap_err();
        assert_eq!(err, LinOpError::DimensionMismatch { expected: 2, actual: 1 });
    }

    #[test]
    fn vstack_rejects_mismatched_columns() {
        assert!(LinOp::vstack(vec![LinOp::identity(2), LinOp::identity(3)]).is_err());
    }

    #[test]
    fn operator_norm_examples() {
        let n = operator_norm(&LinOp::identity(4), 1e-12, 1000, 0).unwrap();
        assert!((n - 1.0).abs() < 1e-12);
        let d = LinOp::dense(Matrix::diag(&[3.0, 1.0]));
        let n = operator_norm(&d, 1e-14, 10_000, 1).unwrap();
        assert!((n - 3.0).abs() < 1e-10, "{n}");
        assert_eq!(operator_norm(&LinOp::zero(2, 2), 1e-10, 10, 0).unwrap(), 0.0);
    }

    #[test]
    fn operator_norm_reports_last_estimate() {
        let d = LinOp::dense(Matrix::from_rows(&[vec![1.0, 0.5], vec![0.3, 0.9]]).unwrap());
        match operator_norm(&d, 1e-15, 1, 5) {
            Err(LinOpError::NotConverged { last_estimate, iters: 1 }) => assert!(last_estimate > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
