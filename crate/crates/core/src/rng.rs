//! Seeded random source used by every generator in the crate.
//!
//! The stream is ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`). Uniform
//! draws take the top 53 bits of a `u64`, so a seed pins every output bit.
//! Gaussian draws use the Box–Muller transform on two uniforms, returning the
//! cosine branch first and caching the sine branch for the next call.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::Matrix;

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { inner: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    /// Standard normal via Box–Muller.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - U lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * t.sin());
        r * t.cos()
    }

    /// Exponential with unit rate by inversion.
    pub fn exponential(&mut self) -> f64 {
        -(1.0 - self.uniform()).ln()
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        let data = self.normal_vec(rows * cols);
        Matrix::from_vec(rows, cols, data).expect("length matches by construction")
    }

    pub fn unit_vector(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v = self.normal_vec(n);
            let nrm = crate::dense::norm2(&v);
            if nrm > 0.0 {
                return v.into_iter().map(|x| x / nrm).collect();
            }
        }
    }
}
