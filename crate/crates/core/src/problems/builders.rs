//! The three dual problems, each as `f(x) + h(Aᵀx)` split with `y = Aᵀx`.

use crate::dense::Matrix;
use crate::funcblocks::{ProxBlock, SmoothBlock};
use crate::linops::LinOp;
use crate::solver::ProblemInstance;

use super::{positive, Dataset, ProblemError};

fn transpose_coupling(data: &Dataset) -> (LinOp, LinOp) {
    let n = data.dim();
    (LinOp::dense(data.features.transpose()), LinOp::scaled(-1.0, LinOp::identity(n)))
}

/// `min ¼‖x‖² − bᵀx  s.t. ‖Aᵀx‖∞ ≤ λ`.
///
/// `f2` is the quadratic with `Q = ½I` and linear part `−b`, so its gradient
/// is `x/2 − b`. `y = Aᵀx` carries the ∞-ball indicator.
pub fn build_dual_lasso(data: &Dataset, lambda: f64) -> Result<ProblemInstance, ProblemError> {
    positive("lambda", lambda)?;
    let m = data.samples();
    let mut q = Matrix::identity(m);
    for i in 0..m {
        q[(i, i)] = 0.5;
    }
    let lin = data.labels.iter().map(|b| -b).collect();
    let (a, b) = transpose_coupling(data);
    Ok(ProblemInstance::new(
        ProxBlock::zero(m),
        SmoothBlock::quadratic(q, lin)?,
        ProxBlock::indicator_linf_ball(data.dim(), lambda)?,
        SmoothBlock::zero(data.dim()),
        a,
        b,
        vec![0.0; data.dim()],
    )?)
}

/// `min bᵀx  s.t. ‖x‖∞ ≤ 1, ‖Aᵀx‖∞ ≤ λ`.
pub fn build_dual_lad(data: &Dataset, lambda: f64) -> Result<ProblemInstance, ProblemError> {
    positive("lambda", lambda)?;
    let m = data.samples();
    let (a, b) = transpose_coupling(data);
    Ok(ProblemInstance::new(
        ProxBlock::indicator_linf_ball(m, 1.0)?,
        SmoothBlock::linear(data.labels.clone()),
        ProxBlock::indicator_linf_ball(data.dim(), lambda)?,
        SmoothBlock::zero(data.dim()),
        a,
        b,
        vec![0.0; data.dim()],
    )?)
}

/// `min ½xᵀQx − 𝟏ᵀx  s.t. 0 ≤ x ≤ C, labelsᵀx = 0` with the linear kernel
/// `Q = diag(labels)·XXᵀ·diag(labels)`. The scalar constraint is written as
/// `labelsᵀx − y = 0` with `y` held in the box `[0, 0]`.
pub fn build_dual_svm(data: &Dataset, c: f64) -> Result<ProblemInstance, ProblemError> {
    positive("C", c)?;
    for (index, &value) in data.labels.iter().enumerate() {
        if value != 1.0 && value != -1.0 {
            return Err(ProblemError::InvalidLabel { index, value });
        }
    }
    let m = data.samples();
    let x = &data.features;
    let mut q = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let k: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| a * b).sum();
            let v = data.labels[i] * data.labels[j] * k;
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
    }
    Ok(ProblemInstance::new(
        ProxBlock::indicator_box(vec![0.0; m], vec![c; m])?,
        SmoothBlock::quadratic(q, vec![-1.0; m])?,
        ProxBlock::indicator_box(vec![0.0], vec![0.0])?,
        SmoothBlock::zero(1),
        LinOp::row_vector(data.labels.clone()),
        LinOp::scaled(-1.0, LinOp::identity(1)),
        vec![0.0],
    )?)
}
