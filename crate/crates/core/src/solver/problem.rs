use crate::funcblocks::{ProxBlock, SmoothBlock};
use crate::linops::LinOp;

use super::{OpCounters, SolverError};

/// `min f1(x) + f2(x) + g1(y) + g2(y)  s.t.  Ax + By = c`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    f1: ProxBlock,
    f2: SmoothBlock,
    g1: ProxBlock,
    g2: SmoothBlock,
    a: LinOp,
    b: LinOp,
    c: Vec<f64>,
}

impl ProblemInstance {
    pub fn new(
        f1: ProxBlock,
        f2: SmoothBlock,
        g1: ProxBlock,
        g2: SmoothBlock,
        a: LinOp,
        b: LinOp,
        c: Vec<f64>,
    ) -> Result<Self, SolverError> {
        let dim = |what: &'static str, expected: usize, actual: usize| {
            if expected == actual {
                Ok(())
            } else {
                Err(SolverError::Dimension { what, expected, actual })
            }
        };
        let (p, q, r) = (a.cols(), b.cols(), c.len());
        dim("f1 dimension vs A columns", p, f1.dim())?;
        dim("f2 dimension vs A columns", p, f2.dim())?;
        dim("g1 dimension vs B columns", q, g1.dim())?;
        dim("g2 dimension vs B columns", q, g2.dim())?;
        dim("A rows vs length of c", r, a.rows())?;
        dim("B rows vs length of c", r, b.rows())?;
        Ok(Self { f1, f2, g1, g2, a, b, c })
    }

    /// `(p, q, r)`: sizes of `x`, `y` and the constraint.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.a.cols(), self.b.cols(), self.c.len())
    }

    pub fn f1(&self) -> &ProxBlock {
        &self.f1
    }
    pub fn f2(&self) -> &SmoothBlock {
        &self.f2
    }
    pub fn g1(&self) -> &ProxBlock {
        &self.g1
    }
    pub fn g2(&self) -> &SmoothBlock {
        &self.g2
    }
    pub fn a(&self) -> &LinOp {
        &self.a
    }
    pub fn b(&self) -> &LinOp {
        &self.b
    }
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub(crate) fn grad_f2(&self, x: &[f64], ops: &mut OpCounters) -> Result<Vec<f64>, SolverError> {
        ops.grad_f2 += 1;
        Ok(self.f2.grad(x)?)
    }

    pub(crate) fn grad_g2(&self, y: &[f64], ops: &mut OpCounters) -> Result<Vec<f64>, SolverError> {
        ops.grad_g2 += 1;
        Ok(self.g2.grad(y)?)
    }

    pub(crate) fn prox_f1(&self, v: &[f64], alpha: f64, ops: &mut OpCounters) -> Result<Vec<f64>, SolverError> {
        ops.prox_f1 += 1;
        Ok(self.f1.prox(v, alpha)?)
    }

    pub(crate) fn prox_g1(&self, v: &[f64], alpha: f64, ops: &mut OpCounters) -> Result<Vec<f64>, SolverError> {
        ops.prox_g1 += 1;
        Ok(self.g1.prox(v, alpha)?)
    }

    pub(crate) fn apply_a(&self, x: &[f64], ops: &mut OpCounters) -> Result<Vec<f64>, SolverError> {
        ops.apply_a += 1;
        Ok(self.a.apply(x)?)
    }

    pub(crate) fn apply_b(&self, y: &[f64], ops: &mut OpCounters) -> Result<Vec<f64>, SolverError> {
        ops.apply_b += 1;
        Ok(self.b.apply(y)?)
    }

    pub(crate) fn adjoint_a(&self, w: &[f64], ops: &mut OpCounters) -> Result<Vec<f64>, SolverError> {
        ops.adjoint_a += 1;
        Ok(self.a.apply_adjoint(w)?)
    }

    pub(crate) fn adjoint_b(&self, w: &[f64], ops: &mut OpCounters) -> Result<Vec<f64>, SolverError> {
        ops.adjoint_b += 1;
        Ok(self.b.apply_adjoint(w)?)
    }

    /// `f1(x) + f2(x) + g1(y) + g2(y)`.
    pub fn objective(&self, x: &[f64], y: &[f64]) -> Result<f64, SolverError> {
        Ok(self.f1.value(x)? + self.f2.value(x)? + self.g1.value(y)? + self.g2.value(y)?)
    }
}
