use crate::dense::{self, Matrix};
use crate::linops::{operator_norm, LinOp};

use super::BlockError;

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Zero,
    Linear(Vec<f64>),
    Quadratic { mat: Matrix, lin: Vec<f64> },
    ScaledSum(Vec<(f64, SmoothBlock)>),
}

/// A differentiable convex term with value and gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothBlock {
    kind: Kind,
    dim: usize,
}

impl SmoothBlock {
    pub fn zero(dim: usize) -> Self {
        Self { kind: Kind::Zero, dim }
    }

    /// `x ↦ ⟨coeff, x⟩`.
    pub fn linear(coeff: Vec<f64>) -> Self {
        let dim = coeff.len();
        Self { kind: Kind::Linear(coeff), dim }
    }

    /// `x ↦ ½ xᵀQx + ⟨q, x⟩`. `Q` must be symmetric; positive
    /// semidefiniteness is the caller's responsibility.
    pub fn quadratic(mat: Matrix, lin: Vec<f64>) -> Result<Self, BlockError> {
        let (r, c) = mat.shape();
        if r != c {
            return Err(BlockError::DimensionMismatch { expected: r, actual: c });
        }
        if lin.len() != r {
            return Err(BlockError::DimensionMismatch { expected: r, actual: lin.len() });
        }
        if !mat.is_symmetric(1e-12) {
            return Err(BlockError::NotSymmetric);
        }
        Ok(Self { kind: Kind::Quadratic { mat, lin }, dim: r })
    }

    /// `x ↦ Σ sᵢ fᵢ(x)`.
    pub fn scaled_sum(terms: Vec<(f64, SmoothBlock)>) -> Result<Self, BlockError> {
        let dim = terms.first().map_or(0, |(_, b)| b.dim);
        for (_, b) in &terms {
            if b.dim != dim {
                return Err(BlockError::DimensionMismatch { expected: dim, actual: b.dim });
            }
        }
        Ok(Self { kind: Kind::ScaledSum(terms), dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero)
    }

    /// The Hessian when the block is zero, linear or quadratic.
    pub fn hessian(&self) -> Option<Matrix> {
        match &self.kind {
            Kind::Zero | Kind::Linear(_) => Some(Matrix::zeros(self.dim, self.dim)),
            Kind::Quadratic { mat, .. } => Some(mat.clone()),
            Kind::ScaledSum(_) => None,
        }
    }

    fn check(&self, x: &[f64]) -> Result<(), BlockError> {
        if x.len() != self.dim {
            return Err(BlockError::DimensionMismatch { expected: self.dim, actual: x.len() });
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> Result<f64, BlockError> {
        self.check(x)?;
        Ok(match &self.kind {
            Kind::Zero => 0.0,
            Kind::Linear(c) => dense::dot(c, x),
            Kind::Quadratic { mat, lin } => 0.5 * dense::dot(x, &mat.mul_vec(x)) + dense::dot(lin, x),
            Kind::ScaledSum(terms) => {
                let mut acc = 0.0;
                for (s, b) in terms {
                    acc += s * b.value(x)?;
                }
                acc
            }
        })
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>, BlockError> {
        self.check(x)?;
        Ok(match &self.kind {
            Kind::Zero => vec![0.0; self.dim],
            Kind::Linear(c) => c.clone(),
            Kind::Quadratic { mat, lin } => dense::add(&mat.mul_vec(x), lin),
            Kind::ScaledSum(terms) => {
                let mut acc = vec![0.0; self.dim];
                for (s, b) in terms {
                    dense::axpy(*s, &b.grad(x)?, &mut acc);
                }
                acc
            }
        })
    }

    /// Global Lipschitz constant of the gradient for zero, linear and
    /// quadratic blocks (power iteration on `Q`). `None` for composite blocks,
    /// whose constant must be supplied by the caller.
    pub fn lipschitz_estimate(&self) -> Result<Option<f64>, BlockError> {
        match &self.kind {
            Kind::Zero | Kind::Linear(_) => Ok(Some(0.0)),
            Kind::Quadratic { mat, .. } => {
                let op = LinOp::dense(mat.clone());
                let l = operator_norm(&op, 1e-12, 100_000, 0x5eed)
                    .or_else(|e| match e {
                        crate::linops::LinOpError::NotConverged { last_estimate, .. } => Ok(last_estimate),
                        other => Err(other),
                    })
                    .map_err(|e| BlockError::Operator(e.to_string()))?;
                Ok(Some(l))
            }
            Kind::ScaledSum(_) => Ok(None),
        }
    }

    /// An upper bound on the gradient's Lipschitz constant that also covers
    /// composite blocks, as `Σ |sᵢ| Lᵢ` over the terms.
    pub fn lipschitz_bound(&self) -> Result<f64, BlockError> {
        match &self.kind {
            Kind::ScaledSum(terms) => {
                let mut acc = 0.0;
                for (s, b) in terms {
                    acc += s.abs() * b.lipschitz_bound()?;
                }
                Ok(acc)
            }
            _ => Ok(self.lipschitz_estimate()?.unwrap_or(0.0)),
        }
    }
}
