use crate::dense::Matrix;
use crate::rng::SeededRng;

use super::{DataSource, Dataset, ProblemError};

fn check_dims(m: usize, n: usize) -> Result<(), ProblemError> {
    if m == 0 || n == 0 {
        return Err(ProblemError::InvalidParameter { name: "dims", reason: format!("need m, n >= 1, got {m} x {n}") });
    }
    Ok(())
}

/// Gaussian features scaled by `1/√m`, a planted model with about a fifth of
/// its entries nonzero, and targets `Aw + 0.1·noise`.
pub fn synth_regression(seed: u64, m: usize, n: usize) -> Result<Dataset, ProblemError> {
    check_dims(m, n)?;
    let mut rng = SeededRng::new(seed);
    let scale = 1.0 / (m as f64).sqrt();
    let features = Matrix::from_vec(m, n, rng.normal_vec(m * n).into_iter().map(|v| v * scale).collect())?;
    let planted: Vec<f64> = (0..n)
        .map(|j| if j % 5 == 0 { rng.normal() } else { 0.0 })
        .collect();
    let clean = features.mul_vec(&planted);
    let labels = clean.iter().map(|v| v + 0.1 * rng.normal()).collect();
    Dataset::new(features, labels, DataSource::Synthetic { seed })
}

/// Gaussian features with labels `sign(⟨a_i, w⟩ + 0.1·noise)` for a random
/// direction `w`. The first two samples are forced into opposite classes.
pub fn synth_classification(seed: u64, m: usize, n: usize) -> Result<Dataset, ProblemError> {
    check_dims(m, n)?;
    let mut rng = SeededRng::new(seed);
    let scale = 1.0 / (n as f64).sqrt();
    let features = Matrix::from_vec(m, n, rng.normal_vec(m * n).into_iter().map(|v| v * scale).collect())?;
    let direction = rng.unit_vector(n);
    let score = features.mul_vec(&direction);
    let mut labels: Vec<f64> = score
        .iter()
        .map(|s| if s + 0.1 * rng.normal() >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    if m >= 2 {
        labels[0] = 1.0;
        labels[1] = -1.0;
    }
    Dataset::new(features, labels, DataSource::Synthetic { seed })
}
