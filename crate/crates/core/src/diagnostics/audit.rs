//! Whole-run verification against a known saddle point.

use crate::dense::{norm2, sub};
use crate::solver::{solve_observed, InitialPoint, ProblemInstance, SolveStatus, SolverOptions, Subroutine};

use super::{descent_slacks, lagrangian_gap, lyapunov_value, DiagnosticsError, Mode, Saddle};

/// Relative size of `x − x₋` above which `ℓ` carries no rounding noise
/// larger than about `1e-13·L`.
pub const RESOLVED_DIFFERENCE: f64 = 1e-3;

/// Per-iteration quantities of one run, indexed so that `gammas[k-1] = γ_k`,
/// `energies[k-1]` is the energy at iterate `k` and `gaps[k] = P_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunAudit {
    pub mode: Mode,
    pub status: SolveStatus,
    pub gammas: Vec<f64>,
    pub energies: Vec<f64>,
    pub gaps: Vec<f64>,
    /// Smallest descent-inequality slack over all steps.
    pub min_slack: f64,
    /// Largest `|λ|` or `|μ|` seen.
    pub max_young: f64,
    /// Largest `γ⁺ − growth·γ`; never positive on a correct run.
    pub max_growth_excess: f64,
    /// Largest `ℓ − L` over steps with a nonzero difference.
    pub max_curvature_excess: f64,
    /// Smallest `ℓ` over steps whose difference is at least
    /// [`RESOLVED_DIFFERENCE`] relative to the iterate. Below that the
    /// gradient difference is dominated by rounding in the two gradients.
    pub min_curvature: f64,
}

impl RunAudit {
    pub fn iterations(&self) -> usize {
        self.gammas.len()
    }

    pub fn min_gamma(&self) -> f64 {
        self.gammas.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest `E_{k+1} − E_k`.
    pub fn max_energy_increase(&self) -> f64 {
        self.energies.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `E_1 / ((K + c)·min_{j≤K+1} γ_j) − min_{k≤K} P_k` with `c = 3` for the
    /// first rule and `1 + φ` for the second. `None` when the run is shorter
    /// than `K + 1` steps.
    pub fn rate_margin(&self, horizon: usize) -> Option<f64> {
        if self.gammas.len() < horizon + 1 || self.gaps.len() < horizon + 1 || self.energies.is_empty() {
            return None;
        }
        let offset = match self.mode {
            Mode::S1 => 3.0,
            Mode::S2 => 1.0 + crate::solver::GOLDEN_RATIO,
        };
        let min_gamma = self.gammas[..=horizon].iter().copied().fold(f64::INFINITY, f64::min);
        let min_gap = self.gaps[..=horizon].iter().copied().fold(f64::INFINITY, f64::min);
        Some(self.energies[0] / ((horizon as f64 + offset) * min_gamma) - min_gap)
    }
}

/// Runs the adaptive solver and records energies, gaps, slacks, Young
/// quotients, growth and curvature bounds at every step.
pub fn audit_run(
    problem: &ProblemInstance,
    saddle: &Saddle,
    opts: &SolverOptions,
    init: &InitialPoint,
) -> Result<RunAudit, DiagnosticsError> {
    let mode = Mode::from_subroutine(opts.subroutine).ok_or(crate::solver::SolverError::InvalidOption {
        name: "subroutine",
        reason: "an audit needs an adaptive rule".into(),
    })?;
    let growth = match opts.subroutine {
        Subroutine::S1 => 1.5,
        _ => crate::solver::GOLDEN_RATIO,
    };
    let mut audit = RunAudit {
        mode,
        status: SolveStatus::MaxIters,
        gammas: Vec::new(),
        energies: Vec::new(),
        gaps: vec![lagrangian_gap(&init.x, &init.y, saddle, problem)?],
        min_slack: f64::INFINITY,
        max_young: 0.0,
        max_growth_excess: f64::NEG_INFINITY,
        max_curvature_excess: f64::NEG_INFINITY,
        min_curvature: f64::INFINITY,
    };
    let mut failure = None;
    let outcome = solve_observed(problem, opts, init, |state, decision, next| {
        if failure.is_some() {
            return;
        }
        let d = &decision.diag;
        audit.gammas.push(decision.gamma_next);
        audit.min_slack = audit.min_slack.min(descent_slacks(decision, state, opts.sigma, opts.epsilon, mode).min());
        for v in [Some(d.lam_a), Some(d.lam_b), d.mu_a, d.mu_b].into_iter().flatten() {
            audit.max_young = audit.max_young.max(v.abs());
        }
        audit.max_growth_excess = audit.max_growth_excess.max(decision.gamma_next - growth * state.gamma_cur);
        for (cur, prev, ell, lip) in [
            (&state.x_cur, &state.x_prev, d.ell_x, d.lip_x),
            (&state.y_cur, &state.y_prev, d.ell_y, d.lip_y),
        ] {
            if cur == prev {
                continue;
            }
            audit.max_curvature_excess = audit.max_curvature_excess.max(ell - lip);
            if norm2(&sub(cur, prev)) >= RESOLVED_DIFFERENCE * norm2(cur).max(1.0) {
                audit.min_curvature = audit.min_curvature.min(ell);
            }
        }
        match lyapunov_value(next, saddle, opts.sigma, mode, problem)
            .and_then(|w| Ok((w.value, lagrangian_gap(&next.x_cur, &next.y_cur, saddle, problem)?)))
        {
            Ok((e, gap)) => {
                audit.energies.push(e);
                audit.gaps.push(gap);
            }
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    audit.status = outcome.status;
    Ok(audit)
}
