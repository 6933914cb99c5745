//! Trace CSV and summary JSON.

use std::fmt::Write as _;

use alia::diagnostics::ResidualNorms;
use alia::solver::{IterationRecord, OpCounters, SolveStatus};
use serde::Serialize;

pub const TRACE_HEADER: &str = "k,gamma,active_term,lamA,lamB,muA,muB,a,b,res2_w12,res2_w3,resinf_w12,resinf_w3,slack_x,slack_y,slack_u,wall_ns";

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// The whole trace as CSV text, header included. Floats use the shortest
/// representation that round-trips, so identical runs give identical bytes
/// apart from the last column.
pub fn trace_csv(trace: &[IterationRecord]) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        let res = &r.residuals;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.k,
            r.gamma,
            r.active_term.map(|t| t.as_str()).unwrap_or(""),
            cell(r.lam_a),
            cell(r.lam_b),
            cell(r.mu_a),
            cell(r.mu_b),
            cell(r.a),
            cell(r.b),
            res.two_norm_w12,
            res.two_norm_w3,
            res.inf_norm_w12,
            res.inf_norm_w3,
            cell(r.slacks.map(|s| s.x)),
            cell(r.slacks.map(|s| s.y)),
            cell(r.slacks.map(|s| s.u)),
            r.wall_ns,
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residuals {
    pub two_norm_w12: f64,
    pub two_norm_w3: f64,
    pub inf_norm_w12: f64,
    pub inf_norm_w3: f64,
}

impl From<ResidualNorms> for Residuals {
    fn from(n: ResidualNorms) -> Self {
        Self {
            two_norm_w12: n.two_norm_w12,
            two_norm_w3: n.two_norm_w3,
            inf_norm_w12: n.inf_norm_w12,
            inf_norm_w3: n.inf_norm_w3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub prox: u64,
    pub grad: u64,
    pub matvec: u64,
}

impl From<OpCounters> for Counts {
    fn from(o: OpCounters) -> Self {
        Self { prox: o.proxes(), grad: o.grads(), matvec: o.matvecs() }
    }
}

/// One solver's line in `summary.json`. Non-finite numbers become `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSummary {
    pub name: String,
    pub kind: String,
    pub status: String,
    pub iterations: usize,
    pub final_residuals: Option<Residuals>,
    pub min_gamma: Option<f64>,
    pub counts: Counts,
}

impl SolverSummary {
    pub fn new(name: &str, kind: &str, status: SolveStatus, trace: &[IterationRecord], ops: OpCounters) -> Self {
        let min_gamma = trace.iter().map(|r| r.gamma).fold(f64::INFINITY, f64::min);
        Self {
            name: name.to_owned(),
            kind: kind.to_owned(),
            status: status.as_str().to_owned(),
            iterations: trace.len(),
            final_residuals: trace.last().map(|r| r.residuals.into()),
            min_gamma: min_gamma.is_finite().then_some(min_gamma),
            counts: ops.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub problem: String,
    pub solvers: Vec<SolverSummary>,
}
