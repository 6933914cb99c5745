//! Run configuration: strict JSON, documented defaults, validation with key
//! paths.

use std::collections::HashSet;
use std::path::PathBuf;

use serde::Deserialize;

use crate::CliError;

/// One experiment: a problem, its data, and the solvers to run on it.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub data: Option<DataConfig>,
    pub solvers: Vec<SolverConfig>,
    #[serde(default)]
    pub stopping: Stopping,
    /// Output directory, relative to the working directory.
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Record descent-inequality slacks in the traces.
    #[serde(default)]
    pub verify: bool,
    /// Seeds the synthetic unmixing data of the consensus problem.
    #[serde(default)]
    pub seed: u64,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ProblemConfig {
    #[serde(rename = "dual_lasso")]
    DualLasso { lambda: f64 },
    #[serde(rename = "dual_lad")]
    DualLad { lambda: f64 },
    #[serde(rename = "dual_svm")]
    DualSvm {
        #[serde(alias = "C")]
        c: f64,
    },
    /// Sparse and low-rank unmixing on seeded synthetic data.
    #[serde(rename = "consensus")]
    Consensus {
        blocks: usize,
        gamma: f64,
        tau: f64,
        bands: usize,
        endmembers: usize,
        pixels: usize,
        /// Absent means noiseless.
        #[serde(default)]
        snr_db: Option<f64>,
    },
    /// A problem written out block by block, see [`crate::custom`].
    #[serde(rename = "custom-file")]
    CustomFile { path: PathBuf },
}

impl ProblemConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemConfig::DualLasso { .. } => "dual_lasso",
            ProblemConfig::DualLad { .. } => "dual_lad",
            ProblemConfig::DualSvm { .. } => "dual_svm",
            ProblemConfig::Consensus { .. } => "consensus",
            ProblemConfig::CustomFile { .. } => "custom-file",
        }
    }

    fn needs_data(&self) -> bool {
        matches!(self, ProblemConfig::DualLasso { .. } | ProblemConfig::DualLad { .. } | ProblemConfig::DualSvm { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataConfig {
    /// LIBSVM text file; relative paths resolve against the config file.
    Libsvm(PathBuf),
    Synthetic(SyntheticData),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticData {
    pub seed: u64,
    /// Samples.
    pub m: usize,
    /// Features.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum SolverConfig {
    #[serde(rename = "alia_s1")]
    AliaS1 {
        #[serde(default)]
        name: Option<String>,
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default = "one")]
        gamma0: f64,
        #[serde(default)]
        epsilon: f64,
    },
    #[serde(rename = "alia_s2")]
    AliaS2 {
        #[serde(default)]
        name: Option<String>,
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default = "one")]
        gamma0: f64,
        #[serde(default)]
        epsilon: f64,
    },
    #[serde(rename = "flip_admm")]
    FlipAdmm {
        #[serde(default)]
        name: Option<String>,
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default = "one")]
        phi: f64,
        /// Defaults to `0.99/(σ‖A‖²)`.
        #[serde(default)]
        eta_x: Option<f64>,
        #[serde(default)]
        eta_y: Option<f64>,
    },
    #[serde(rename = "condat_vu")]
    CondatVu {
        #[serde(default)]
        name: Option<String>,
        #[serde(default = "one")]
        beta: f64,
        /// Estimated from the smooth term when absent.
        #[serde(default)]
        lipschitz: Option<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl SolverConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            SolverConfig::AliaS1 { .. } => "alia_s1",
            SolverConfig::AliaS2 { .. } => "alia_s2",
            SolverConfig::FlipAdmm { .. } => "flip_admm",
            SolverConfig::CondatVu { .. } => "condat_vu",
        }
    }

    /// File stem of the trace; the kind unless a name is given.
    pub fn name(&self) -> &str {
        let name = match self {
            SolverConfig::AliaS1 { name, .. }
            | SolverConfig::AliaS2 { name, .. }
            | SolverConfig::FlipAdmm { name, .. }
            | SolverConfig::CondatVu { name, .. } => name,
        };
        name.as_deref().unwrap_or(self.kind())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stopping {
    #[serde(default = "default_tol_two")]
    pub tol_two: f64,
    #[serde(default = "default_tol_inf")]
    pub tol_inf: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

fn default_tol_two() -> f64 {
    1e-4
}

fn default_tol_inf() -> f64 {
    1e-6
}

fn default_max_iters() -> usize {
    100_000
}

impl Default for Stopping {
    fn default() -> Self {
        Self { tol_two: default_tol_two(), tol_inf: default_tol_inf(), max_iters: default_max_iters() }
    }
}

/// Parses and validates a configuration. Unknown keys and invalid values
/// are reported with their path, e.g. `stopping.tol_two`.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| path_error(&e))?;
    validate(&config)?;
    Ok(config)
}

/// Names the offending key in full; for an unknown field the path alone
/// stops at the enclosing object.
pub(crate) fn path_error(e: &serde_path_to_error::Error<serde_json::Error>) -> CliError {
    let message = e.inner().to_string();
    let mut key = e.path().to_string();
    if let Some(field) = message.strip_prefix("unknown field `").and_then(|rest| rest.split('`').next()) {
        key = if key == "." { field.to_owned() } else { format!("{key}.{field}") };
    }
    CliError::Config { key, message }
}

fn bad(key: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Config { key: key.into(), message: message.into() }
}

fn positive(key: impl Into<String>, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(key, format!("must be positive and finite, got {v}")))
    }
}

fn validate(c: &RunConfig) -> Result<(), CliError> {
    positive("stopping.tol_two", c.stopping.tol_two)?;
    positive("stopping.tol_inf", c.stopping.tol_inf)?;
    match &c.problem {
        ProblemConfig::DualLasso { lambda } | ProblemConfig::DualLad { lambda } => positive("problem.lambda", *lambda)?,
        ProblemConfig::DualSvm { c } => positive("problem.c", *c)?,
        ProblemConfig::Consensus { blocks, gamma, tau, bands, endmembers, pixels, snr_db } => {
            if !(2..=4).contains(blocks) {
                return Err(bad("problem.blocks", format!("must be 2, 3 or 4, got {blocks}")));
            }
            for (key, v) in [("problem.gamma", gamma), ("problem.tau", tau)] {
                if !(*v >= 0.0) || !v.is_finite() {
                    return Err(bad(key, format!("must be nonnegative and finite, got {v}")));
                }
            }
            if *endmembers == 0 || *pixels == 0 || bands < endmembers {
                return Err(bad("problem", "need bands >= endmembers >= 1 and pixels >= 1"));
            }
            if let Some(s) = snr_db {
                if s.is_nan() {
                    return Err(bad("problem.snr_db", "must not be NaN"));
                }
            }
        }
        ProblemConfig::CustomFile { .. } => {}
    }
    match (c.problem.needs_data(), &c.data) {
        (true, None) => return Err(bad("data", format!("required by problem kind {}", c.problem.kind()))),
        (false, Some(_)) => return Err(bad("data", format!("not used by problem kind {}", c.problem.kind()))),
        (_, Some(DataConfig::Synthetic(s))) if s.m == 0 || s.n == 0 => {
            return Err(bad("data.synthetic", format!("need m, n >= 1, got {} x {}", s.m, s.n)))
        }
        _ => {}
    }
    if c.solvers.is_empty() {
        return Err(bad("solvers", "at least one solver is required"));
    }
    let mut names = HashSet::new();
    for (i, s) in c.solvers.iter().enumerate() {
        let key = |field: &str| format!("solvers[{i}].{field}");
        if !names.insert(s.name()) {
            return Err(bad(key("name"), format!("duplicate solver name {}", s.name())));
        }
        match s {
            SolverConfig::AliaS1 { sigma, gamma0, epsilon, .. } | SolverConfig::AliaS2 { sigma, gamma0, epsilon, .. } => {
                positive(key("sigma"), *sigma)?;
                positive(key("gamma0"), *gamma0)?;
                let cap = 0.5f64.min(1.0 / (4.0 * sigma));
                if !(*epsilon >= 0.0) || *epsilon >= cap {
                    return Err(bad(key("epsilon"), format!("must lie in [0, {cap}), got {epsilon}")));
                }
            }
            SolverConfig::FlipAdmm { sigma, phi, eta_x, eta_y, .. } => {
                positive(key("sigma"), *sigma)?;
                positive(key("phi"), *phi)?;
                for (field, v) in [("eta_x", eta_x), ("eta_y", eta_y)] {
                    if let Some(v) = v {
                        positive(key(field), *v)?;
                    }
                }
            }
            SolverConfig::CondatVu { beta, lipschitz, .. } => {
                positive(key("beta"), *beta)?;
                if let Some(l) = lipschitz {
                    if !(*l >= 0.0) || !l.is_finite() {
                        return Err(bad(key("lipschitz"), format!("must be nonnegative and finite, got {l}")));
                    }
                }
            }
        }
    }
    Ok(())
}
