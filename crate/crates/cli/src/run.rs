//! Builds the configured problem, runs the solvers and writes their output.

use std::path::{Path, PathBuf};

use alia::baselines::{condat_vu_solve, flip_admm_solve, CompositeProblem, CondatVuOptions, FlipOptions, StopRule};
use alia::problems::{
    build_consensus, build_dual_lad, build_dual_lasso, build_dual_svm, read_libsvm, synth_classification,
    synth_regression, synth_unmixing, BlockSpec, Dataset,
};
use alia::solver::{solve, InitialPoint, IterationRecord, OpCounters, SolveStatus};
use alia::{ProblemInstance, SolverOptions, Subroutine};
use rayon::prelude::*;

use crate::config::{parse_config, DataConfig, ProblemConfig, RunConfig, SolverConfig, Stopping};
use crate::custom::CustomProblem;
use crate::output::{trace_csv, SolverSummary, Summary};
use crate::CliError;

/// Reads and validates a configuration file. Relative data paths inside it
/// resolve against the returned directory.
pub fn load_config(path: &Path) -> Result<(RunConfig, PathBuf), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let config = parse_config(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((config, base))
}

fn problem_err(e: impl std::fmt::Display) -> CliError {
    CliError::Problem(e.to_string())
}

fn load_data(data: &DataConfig, base: &Path, classification: bool) -> Result<Dataset, CliError> {
    match data {
        DataConfig::Libsvm(path) => {
            let path = base.join(path);
            if !path.is_file() {
                return Err(CliError::Io { path, message: "data file not found".into() });
            }
            read_libsvm(&path).map_err(problem_err)
        }
        DataConfig::Synthetic(s) if classification => synth_classification(s.seed, s.m, s.n).map_err(problem_err),
        DataConfig::Synthetic(s) => synth_regression(s.seed, s.m, s.n).map_err(problem_err),
    }
}

/// The problem and its starting point (zeros unless a custom file gives one).
pub fn build_problem(config: &RunConfig, base: &Path) -> Result<(ProblemInstance, InitialPoint), CliError> {
    let data = |classification| {
        let d = config.data.as_ref().ok_or_else(|| CliError::Config { key: "data".into(), message: "missing".into() })?;
        load_data(d, base, classification)
    };
    let (problem, start) = match &config.problem {
        ProblemConfig::DualLasso { lambda } => (build_dual_lasso(&data(false)?, *lambda).map_err(problem_err)?, None),
        ProblemConfig::DualLad { lambda } => (build_dual_lad(&data(false)?, *lambda).map_err(problem_err)?, None),
        ProblemConfig::DualSvm { c } => (build_dual_svm(&data(true)?, *c).map_err(problem_err)?, None),
        ProblemConfig::Consensus { blocks, gamma, tau, bands, endmembers, pixels, snr_db } => {
            let unmixing = synth_unmixing(config.seed, *bands, *endmembers, *pixels, snr_db.unwrap_or(f64::INFINITY))
                .map_err(problem_err)?;
            let spec = BlockSpec::from_data(*blocks, *gamma, *tau, &unmixing).map_err(problem_err)?;
            (build_consensus(&spec, &unmixing).map_err(problem_err)?, None)
        }
        ProblemConfig::CustomFile { path } => CustomProblem::read(&base.join(path))?.build()?,
    };
    let start = start.unwrap_or_else(|| InitialPoint::zeros(&problem));
    Ok((problem, start))
}

/// The result of one solver entry.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub name: String,
    pub kind: &'static str,
    pub status: SolveStatus,
    pub trace: Vec<IterationRecord>,
    pub ops: OpCounters,
}

pub fn run_solver(
    problem: &ProblemInstance,
    start: &InitialPoint,
    solver: &SolverConfig,
    stopping: &Stopping,
    verify: bool,
) -> Result<SolverRun, CliError> {
    let fail = |e: &dyn std::fmt::Display| CliError::Solver { name: solver.name().to_owned(), message: e.to_string() };
    let stop = StopRule { tol_two: stopping.tol_two, tol_inf: stopping.tol_inf, max_iters: stopping.max_iters };
    let adaptive = |subroutine, sigma, gamma0, epsilon| {
        let opts = SolverOptions {
            sigma,
            gamma0,
            epsilon,
            subroutine,
            max_iters: stopping.max_iters,
            tol_two: stopping.tol_two,
            tol_inf: stopping.tol_inf,
            verify,
        };
        solve(problem, &opts, start).map(|o| (o.status, o.trace, o.ops)).map_err(|e| fail(&e))
    };
    let (status, trace, ops) = match solver {
        SolverConfig::AliaS1 { sigma, gamma0, epsilon, .. } => adaptive(Subroutine::S1, *sigma, *gamma0, *epsilon)?,
        SolverConfig::AliaS2 { sigma, gamma0, epsilon, .. } => adaptive(Subroutine::S2, *sigma, *gamma0, *epsilon)?,
        SolverConfig::FlipAdmm { sigma, phi, eta_x, eta_y, .. } => {
            let defaults = FlipOptions::with_defaults(problem, *sigma).map_err(|e| fail(&e))?;
            let opts = FlipOptions::new(
                problem,
                *sigma,
                *phi,
                eta_x.unwrap_or(defaults.eta_x),
                eta_y.unwrap_or(defaults.eta_y),
            )
            .map_err(|e| fail(&e))?;
            let out = flip_admm_solve(problem, &opts, start, &stop).map_err(|e| fail(&e))?;
            (out.status, out.trace, out.ops)
        }
        SolverConfig::CondatVu { beta, lipschitz, .. } => {
            let composite = CompositeProblem::from_instance(problem).map_err(|e| fail(&e))?;
            let opts = CondatVuOptions::new(&composite, *beta, *lipschitz).map_err(|e| fail(&e))?;
            let out = condat_vu_solve(&composite, &opts, &start.x, &start.u, &stop).map_err(|e| fail(&e))?;
            (out.status, out.trace, out.ops)
        }
    };
    Ok(SolverRun { name: solver.name().to_owned(), kind: solver.kind(), status, trace, ops })
}

/// What a finished run reports back.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub summary: Summary,
}

impl RunReport {
    /// 0 when every solver converged, 2 when any stopped at the iteration
    /// cap, 1 when any diverged.
    pub fn exit_code(&self) -> u8 {
        let statuses = || self.summary.solvers.iter().map(|s| s.status.as_str());
        if statuses().any(|s| s == SolveStatus::Diverged.as_str()) {
            1
        } else if statuses().any(|s| s == SolveStatus::MaxIters.as_str()) {
            2
        } else {
            0
        }
    }
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub out_dir: Option<PathBuf>,
    pub verify: bool,
    /// Solver entries run concurrently when above 1; otherwise in order.
    pub jobs: Option<usize>,
}

pub fn run_config(config: &RunConfig, base: &Path, overrides: &RunOverrides) -> Result<RunReport, CliError> {
    let (problem, start) = build_problem(config, base)?;
    let verify = config.verify || overrides.verify;
    let one = |s: &SolverConfig| run_solver(&problem, &start, s, &config.stopping, verify);
    let runs: Vec<SolverRun> = match overrides.jobs {
        Some(n) if n > 1 => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(problem_err)?;
            pool.install(|| config.solvers.par_iter().map(one).collect::<Result<_, _>>())?
        }
        _ => config.solvers.iter().map(one).collect::<Result<_, _>>()?,
    };

    let out_dir = overrides.out_dir.clone().unwrap_or_else(|| config.output.clone());
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    let mut solvers = Vec::with_capacity(runs.len());
    for run in &runs {
        let path = out_dir.join(format!("{}.trace.csv", run.name));
        std::fs::write(&path, trace_csv(&run.trace)).map_err(|e| CliError::io(&path, e))?;
        solvers.push(SolverSummary::new(&run.name, run.kind, run.status, &run.trace, run.ops));
    }
    let summary = Summary { problem: config.problem.kind().to_owned(), solvers };
    let path = out_dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(RunReport { out_dir, summary })
}
