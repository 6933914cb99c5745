use crate::dense::{self, Matrix};

use super::BlockError;

const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `M = U diag(S) Vᵀ`.
///
/// For an `m × n` input with `k = min(m, n)`: `u` is `m × k`, `v` is `n × k`,
/// and `s` holds `k` nonnegative values in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        let (m, k) = self.u.shape();
        let n = self.v.rows();
        let mut out = Matrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..k {
                    acc += self.u[(i, l)] * self.s[l] * self.v[(j, l)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Column pairs are rotated until every pair satisfies
/// `|⟨c_i, c_j⟩| ≤ 1e-12 ‖c_i‖ ‖c_j‖`. Columns that end up exactly zero get
/// left singular vectors completed by Gram–Schmidt so `UᵀU = I` always holds.
pub fn jacobi_svd(m: &Matrix) -> Result<Svd, BlockError> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(BlockError::EmptyMatrix);
    }
    if !m.is_finite() {
        return Err(BlockError::NonFinite("svd input"));
    }
    if rows < cols {
        let t = jacobi_svd(&m.transpose())?;
        return Ok(Svd { u: t.v, s: t.s, v: t.u });
    }

    let mut work: Vec<Vec<f64>> = (0..cols).map(|j| m.column(j)).collect();
    let mut vcols: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            e
        })
        .collect();

    // columns below this squared norm are rounding residue of a rank
    // deficiency; rotating them against others never settles
    let negligible = (1e-15 * m.frobenius_norm()).powi(2);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let alpha = dense::norm2_sq(&work[i]);
                let beta = dense::norm2_sq(&work[j]);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = dense::dot(&work[i], &work[j]);
                let c = gamma.abs() / (alpha.sqrt() * beta.sqrt());
                off = off.max(c);
                if c <= 1e-16 {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut work, i, j, cs, sn);
                rotate(&mut vcols, i, j, cs, sn);
            }
        }
        if off <= OFF_DIAGONAL_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(BlockError::SvdNotConverged(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = work.iter().map(|c| dense::norm2(c)).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let mut u = Matrix::zeros(rows, cols);
    let mut v = Matrix::zeros(cols, cols);
    let mut s = Vec::with_capacity(cols);
    let mut ucols: Vec<Vec<f64>> = Vec::with_capacity(cols);
    for &j in &order {
        let sj = norms[j];
        s.push(sj);
        if sj * sj > negligible {
            ucols.push(dense::scale(1.0 / sj, &work[j]));
        } else {
            ucols.push(complete_basis(&ucols, rows));
        }
    }
    for (l, &j) in order.iter().enumerate() {
        for i in 0..rows {
            u[(i, l)] = ucols[l][i];
        }
        for i in 0..cols {
            v[(i, l)] = vcols[j][i];
        }
    }
    Ok(Svd { u, s, v })
}

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, cs: f64, sn: f64) {
    let (left, right) = cols.split_at_mut(j);
    let ci = &mut left[i];
    let cj = &mut right[0];
    for (a, b) in ci.iter_mut().zip(cj.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = cs * x - sn * y;
        *b = sn * x + cs * y;
    }
}

/// A unit vector orthogonal to every vector in `basis`.
fn complete_basis(basis: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut best = vec![0.0; n];
    let mut best_norm = -1.0;
    for e in 0..n {
        let mut cand = vec![0.0; n];
        cand[e] = 1.0;
        // Two Gram–Schmidt passes keep the result orthogonal to working precision.
        for _ in 0..2 {
            for b in basis {
                let d = dense::dot(b, &cand);
                dense::axpy(-d, b, &mut cand);
            }
        }
        let nrm = dense::norm2(&cand);
        if nrm > best_norm {
            best_norm = nrm;
            best = cand;
        }
        if nrm > 0.5 {
            break;
        }
    }
    dense::scale(1.0 / best_norm, &best)
}
