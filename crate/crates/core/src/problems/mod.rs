//! Benchmark problem builders, LIBSVM ingestion and seeded generators.

mod builders;
mod libsvm;
mod planted;
mod synth;
mod unmixing;

pub use builders::{build_dual_lad, build_dual_lasso, build_dual_svm};
pub use libsvm::{parse_libsvm, read_libsvm, write_libsvm};
pub use planted::{planted_instance, PlantedInstance, PlantedKind};
pub use synth::{synth_classification, synth_regression};
pub use unmixing::{build_consensus, synth_unmixing, BlockSpec, UnmixingData};

use std::path::PathBuf;

use thiserror::Error;

use crate::dense::{Matrix, ShapeError};
use crate::funcblocks::BlockError;
use crate::linops::LinOpError;
use crate::solver::SolverError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("label {index} must be -1 or +1, got {value}")]
    InvalidLabel { index: usize, value: f64 },
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    LinOp(#[from] LinOpError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    Text,
    Synthetic { seed: u64 },
}

/// `m` samples by `n` features with one label per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<f64>,
    pub source: DataSource,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<f64>, source: DataSource) -> Result<Self, ProblemError> {
        if features.rows() != labels.len() {
            return Err(ShapeError::Length { expected: features.rows(), actual: labels.len() }.into());
        }
        if !features.is_finite() || labels.iter().any(|v| !v.is_finite()) {
            return Err(ProblemError::InvalidParameter {
                name: "dataset",
                reason: "features and labels must be finite".into(),
            });
        }
        Ok(Self { features, labels, source })
    }

    pub fn samples(&self) -> usize {
        self.features.rows()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }
}

fn positive(name: &'static str, v: f64) -> Result<(), ProblemError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ProblemError::InvalidParameter { name, reason: format!("must be positive and finite, got {v}") })
    }
}
