//! Problems written out block by block in JSON.
//!
//! ```json
//! {
//!   "f1": {"kind": "zero", "dim": 1},
//!   "f2": {"kind": "quadratic", "matrix": [[1.0]], "linear": [0.0]},
//!   "g1": {"kind": "zero", "dim": 1},
//!   "g2": {"kind": "zero", "dim": 1},
//!   "a": [[1.0]],
//!   "b": [[-1.0]],
//!   "c": [0.0],
//!   "start": {"x": [1.0], "y": [0.0], "u": [0.0]}
//! }
//! ```
//!
//! `a` and `b` are dense row lists. `start` is optional and defaults to zeros.

use std::path::Path;

use alia::solver::InitialPoint;
use alia::{LinOp, Matrix, ProblemInstance, ProxBlock, SmoothBlock};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomProblem {
    pub f1: ProxSpec,
    pub f2: SmoothSpec,
    pub g1: ProxSpec,
    pub g2: SmoothSpec,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    #[serde(default)]
    pub start: Option<StartSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartSpec {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProxSpec {
    Zero { dim: usize },
    L1 { weights: Vec<f64> },
    NonnegL1 { weights: Vec<f64> },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    LinfBall { dim: usize, radius: f64 },
    Nonneg { dim: usize },
    Hyperplane { normal: Vec<f64> },
    WeightedNuclear { weights: Vec<f64>, rows: usize, cols: usize },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SmoothSpec {
    Zero { dim: usize },
    Linear { coeff: Vec<f64> },
    /// `½xᵀMx + lᵀx` with `M` symmetric positive semidefinite.
    Quadratic { matrix: Vec<Vec<f64>>, linear: Vec<f64> },
}

fn problem_err(what: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Problem(format!("{what}: {e}"))
}

impl ProxSpec {
    fn build(&self, what: &str) -> Result<ProxBlock, CliError> {
        let err = |e| problem_err(what, e);
        Ok(match self {
            ProxSpec::Zero { dim } => ProxBlock::zero(*dim),
            ProxSpec::L1 { weights } => ProxBlock::l1(weights.clone()).map_err(err)?,
            ProxSpec::NonnegL1 { weights } => ProxBlock::nonneg_l1(weights.clone()).map_err(err)?,
            ProxSpec::Box { lower, upper } => ProxBlock::indicator_box(lower.clone(), upper.clone()).map_err(err)?,
            ProxSpec::LinfBall { dim, radius } => ProxBlock::indicator_linf_ball(*dim, *radius).map_err(err)?,
            ProxSpec::Nonneg { dim } => ProxBlock::indicator_nonneg(*dim),
            ProxSpec::Hyperplane { normal } => ProxBlock::indicator_hyperplane(normal.clone()).map_err(err)?,
            ProxSpec::WeightedNuclear { weights, rows, cols } => {
                ProxBlock::weighted_nuclear(weights.clone(), *rows, *cols).map_err(err)?
            }
        })
    }
}

impl SmoothSpec {
    fn build(&self, what: &str) -> Result<SmoothBlock, CliError> {
        Ok(match self {
            SmoothSpec::Zero { dim } => SmoothBlock::zero(*dim),
            SmoothSpec::Linear { coeff } => SmoothBlock::linear(coeff.clone()),
            SmoothSpec::Quadratic { matrix, linear } => {
                let m = Matrix::from_rows(matrix).map_err(|e| problem_err(what, e))?;
                SmoothBlock::quadratic(m, linear.clone()).map_err(|e| problem_err(what, e))?
            }
        })
    }
}

impl CustomProblem {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de)
            .map_err(|e| match crate::config::path_error(&e) {
                CliError::Config { key, message } => CliError::Config { key: format!("custom-file.{key}"), message },
                other => other,
            })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn build(&self) -> Result<(ProblemInstance, Option<InitialPoint>), CliError> {
        let a = Matrix::from_rows(&self.a).map_err(|e| problem_err("a", e))?;
        let b = Matrix::from_rows(&self.b).map_err(|e| problem_err("b", e))?;
        let problem = ProblemInstance::new(
            self.f1.build("f1")?,
            self.f2.build("f2")?,
            self.g1.build("g1")?,
            self.g2.build("g2")?,
            LinOp::dense(a),
            LinOp::dense(b),
            self.c.clone(),
        )
        .map_err(|e| problem_err("instance", e))?;
        let start = self.start.as_ref().map(|s| InitialPoint { x: s.x.clone(), y: s.y.clone(), u: s.u.clone() });
        if let Some(s) = &start {
            let (p, q, r) = problem.dims();
            if (s.x.len(), s.y.len(), s.u.len()) != (p, q, r) {
                return Err(problem_err("start", format!("expected lengths ({p}, {q}, {r})")));
            }
        }
        Ok((problem, start))
    }
}
