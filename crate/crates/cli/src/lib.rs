//! Experiment runner for the `alia` solvers.
//!
//! A JSON configuration names a problem, where its data comes from and a list
//! of solvers. [`run::run_config`] builds the problem once, runs every solver
//! on it and writes one CSV trace per solver plus a `summary.json`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

use thiserror::Error;

pub mod config;
pub mod custom;
pub mod output;
pub mod run;

#[derive(Debug, Error)]
pub enum CliError {
    /// Rejected configuration; `key` is the JSON path of the offending entry.
    #[error("{key}: {message}")]
    Config { key: String, message: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("problem setup failed: {0}")]
    Problem(String),
    #[error("solver {name} failed: {message}")]
    Solver { name: String, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        CliError::Io { path: path.into(), message: err.to_string() }
    }
}
