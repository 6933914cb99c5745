// Builders, parser and generators checked against hand-derived optima and
// independent solvers.

use alia::dense::{norm_inf, sub};
use alia::diagnostics::{kkt_residuals, proximal_gradient_solve, reference_solve};
use alia::problems::{
    build_consensus, build_dual_lad, build_dual_lasso, build_dual_svm, parse_libsvm, synth_regression, synth_unmixing,
    write_libsvm, BlockSpec, DataSource, Dataset, UnmixingData,
};
use alia::solver::{advance, select_step, solve, InitialPoint, OpCounters, SolveOutcome, SolveStatus, SolverState};
use alia::{Matrix, ProblemInstance, ProxBlock, SmoothBlock, SolverOptions, Subroutine};
use proptest::prelude::*;

mod common;
use common::solve_dense;

fn dataset(rows: &[Vec<f64>], labels: &[f64]) -> Dataset {
    Dataset::new(Matrix::from_rows(rows).unwrap(), labels.to_vec(), DataSource::Text).unwrap()
}

fn tight(sub: Subroutine) -> SolverOptions {
    SolverOptions { subroutine: sub, tol_two: 1e-10, tol_inf: 1e-11, max_iters: 400_000, ..SolverOptions::default() }
}

fn run(problem: &ProblemInstance, sub: Subroutine) -> SolveOutcome {
    let out = solve(problem, &tight(sub), &InitialPoint::zeros(problem)).unwrap();
    assert_eq!(out.status, SolveStatus::Converged);
    out
}

#[test]
fn dual_lasso_scalar_instance_clips_at_the_ball() {
    // min ¼x² − x s.t. |2x| ≤ 0.1: the free minimizer x = 2 is outside, and
    // the objective decreases up to it, so x* = 0.05, y* = 2x* = 0.1 and
    // x*/2 − 1 + 2u* = 0 gives u* = 0.4875.
    let p = build_dual_lasso(&dataset(&[vec![2.0]], &[1.0]), 0.1).unwrap();
    for rule in [Subroutine::S1, Subroutine::S2] {
        let out = run(&p, rule);
        assert!((out.state.x_cur[0] - 0.05).abs() < 1e-8, "{rule:?}");
        assert!((out.state.y_cur[0] - 0.1).abs() < 1e-8);
        assert!((out.state.u_cur[0] - 0.4875).abs() < 1e-6);
    }
    let s = reference_solve(&p, 1_000_000, 1e-10).unwrap();
    assert!((s.x[0] - 0.05).abs() < 1e-8 && (s.u[0] - 0.4875).abs() < 1e-6);
}

#[test]
fn dual_lasso_with_huge_lambda_is_unconstrained() {
    let data = synth_regression(3, 6, 2).unwrap();
    let p = build_dual_lasso(&data, 1e9).unwrap();
    let out = run(&p, Subroutine::S1);
    for (x, b) in out.state.x_cur.iter().zip(&data.labels) {
        assert!((x - 2.0 * b).abs() < 1e-6, "{x} vs {}", 2.0 * b);
    }
}

#[test]
fn zero_targets_give_zero_solutions() {
    let mut data = synth_regression(4, 8, 3).unwrap();
    data.labels = vec![0.0; 8];
    for p in [build_dual_lasso(&data, 0.5).unwrap(), build_dual_lad(&data, 0.5).unwrap()] {
        let out = run(&p, Subroutine::S2);
        assert!(norm_inf(&out.state.x_cur) < 1e-8);
        assert!(norm_inf(&out.state.y_cur) < 1e-8);
    }
}

#[test]
fn dual_lad_scalar_instance_hits_the_box_corner() {
    // min x over [−1, 1] with the λ-ball far away
    let p = build_dual_lad(&dataset(&[vec![1.0]], &[1.0]), 1e6).unwrap();
    let out = run(&p, Subroutine::S1);
    assert!((out.state.x_cur[0] + 1.0).abs() < 1e-8);
}

#[test]
fn dual_lad_objective_matches_reference() {
    let data = synth_regression(20, 20, 5).unwrap();
    let p = build_dual_lad(&data, 0.1).unwrap();
    let reference = reference_solve(&p, 2_000_000, 1e-10).unwrap();
    let best = p.objective(&reference.x, &reference.y).unwrap();
    for rule in [Subroutine::S1, Subroutine::S2] {
        let out = run(&p, rule);
        let got = p.objective(&out.state.x_cur, &out.state.y_cur).unwrap();
        assert!((got - best).abs() <= 1e-6, "{rule:?}: {got} vs {best}");
    }
}

#[test]
fn dual_svm_symmetric_pair() {
    // Q = I: min ½‖x‖² − x1 − x2 s.t. x1 = x2, 0 ≤ x ≤ 0.1. The objective
    // along x1 = x2 = t is t² − 2t, decreasing on [0, 0.1], so x* = (0.1, 0.1).
    let data = dataset(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[1.0, -1.0]);
    let p = build_dual_svm(&data, 0.1).unwrap();
    for rule in [Subroutine::S1, Subroutine::S2] {
        let out = run(&p, rule);
        assert!(norm_inf(&sub(&out.state.x_cur, &[0.1, 0.1])) < 1e-8, "{rule:?}: {:?}", out.state.x_cur);
    }
    let collapsed = build_dual_svm(&data, 1e-12).unwrap();
    assert!(norm_inf(&run(&collapsed, Subroutine::S1).state.x_cur) <= 1e-12);
}

#[test]
fn dual_svm_single_class_forces_zero() {
    let data = dataset(&[vec![1.0, 2.0], vec![0.5, -1.0], vec![-1.0, 0.0]], &[1.0, 1.0, 1.0]);
    let p = build_dual_svm(&data, 1.0).unwrap();
    let out = run(&p, Subroutine::S2);
    assert!(norm_inf(&out.state.x_cur) < 1e-8);
    assert!(build_dual_svm(&dataset(&[vec![1.0]], &[0.5]), 1.0).is_err());
}

#[test]
fn builders_satisfy_kkt_at_the_reference_saddle() {
    // one adaptive step taken from the reference saddle barely moves
    let reg = synth_regression(5, 12, 4).unwrap();
    let mut cls = synth_regression(6, 12, 4).unwrap();
    cls.labels = cls.labels.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
    cls.labels[0] = 1.0;
    cls.labels[1] = -1.0;
    let problems = [
        build_dual_lasso(&reg, 0.1).unwrap(),
        build_dual_lad(&reg, 0.1).unwrap(),
        build_dual_svm(&cls, 1.0).unwrap(),
    ];
    for (i, p) in problems.iter().enumerate() {
        let s = reference_solve(p, 2_000_000, 1e-10).unwrap();
        for rule in [Subroutine::S1, Subroutine::S2] {
            let opts = SolverOptions { subroutine: rule, ..SolverOptions::default() };
            let mut ops = OpCounters::default();
            let init = InitialPoint { x: s.x.clone(), y: s.y.clone(), u: s.u.clone() };
            let state = SolverState::initial(p, &init, opts.gamma0, &mut ops).unwrap();
            let decision = select_step(&state, p, &opts, &mut ops).unwrap();
            let next = advance(&state, &decision, p, &opts, &mut ops).unwrap();
            let n = kkt_residuals(&state, &next, decision.gamma_next, p).unwrap().norms();
            assert!(n.max_inf() <= 1e-6, "problem {i} {rule:?}: {n:?}");
        }
    }
}

fn consensus_copy(out: &SolveOutcome) -> Vec<f64> {
    // y is the consensus variable Z
    out.state.y_cur.clone()
}

/// `½‖Y − ΦW‖²` over row-major `W`, built here without the library's
/// consensus code.
fn misfit(data: &UnmixingData) -> SmoothBlock {
    let (_, n, k) = data.dims();
    let mut h = Matrix::zeros(n * k, n * k);
    let mut lin = vec![0.0; n * k];
    for i in 0..n {
        for j in 0..k {
            for i2 in 0..n {
                h[(i * k + j, i2 * k + j)] = (0..data.phi.rows()).map(|l| data.phi[(l, i)] * data.phi[(l, i2)]).sum();
            }
            lin[i * k + j] = -(0..data.phi.rows()).map(|l| data.phi[(l, i)] * data.y[(l, j)]).sum::<f64>();
        }
    }
    SmoothBlock::quadratic(h, lin).unwrap()
}

#[test]
fn two_block_consensus_without_rank_term_matches_proximal_gradient() {
    let data = synth_unmixing(8, 10, 3, 2, 30.0).unwrap();
    let gamma = 1e-3;
    let spec = BlockSpec::from_data(2, gamma, 0.0, &data).unwrap();
    let out = run(&build_consensus(&spec, &data).unwrap(), Subroutine::S1);
    let f = misfit(&data);
    let g = ProxBlock::nonneg_l1(data.a_weights.as_slice().iter().map(|a| gamma * a).collect()).unwrap();
    let step = 1.0 / f.lipschitz_bound().unwrap();
    let oracle = proximal_gradient_solve(&f, &g, &[0.0; 6], step, 1e-12, 10_000_000).unwrap();
    let err = norm_inf(&sub(&consensus_copy(&out), &oracle));
    assert!(err <= 1e-5, "{err}");
}

#[test]
fn three_and_four_block_splits_agree() {
    let data = synth_unmixing(9, 10, 3, 3, 30.0).unwrap();
    let (gamma, tau) = (1e-3, 0.05);
    let mut values = Vec::new();
    for blocks in [3, 4] {
        let spec = BlockSpec::from_data(blocks, gamma, tau, &data).unwrap();
        let out = run(&build_consensus(&spec, &data).unwrap(), Subroutine::S2);
        values.push(data.objective(gamma, tau, &consensus_copy(&out)).unwrap());
    }
    assert!((values[0] - values[1]).abs() <= 1e-5, "{values:?}");
}

#[test]
fn unregularized_consensus_is_least_squares() {
    let data = synth_unmixing(10, 12, 3, 2, 40.0).unwrap();
    let (_, n, k) = data.dims();
    let gram: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|i2| (0..12).map(|l| data.phi[(l, i)] * data.phi[(l, i2)]).sum()).collect())
        .collect();
    let mut w_ls = vec![0.0; n * k];
    for j in 0..k {
        let rhs: Vec<f64> = (0..n).map(|i| (0..12).map(|l| data.phi[(l, i)] * data.y[(l, j)]).sum()).collect();
        for (i, v) in solve_dense(gram.clone(), rhs).into_iter().enumerate() {
            w_ls[i * k + j] = v;
        }
    }
    // the nonnegativity constraint must be inactive for the comparison
    assert!(w_ls.iter().all(|v| *v > 1e-3), "{w_ls:?}");
    for blocks in [2, 3, 4] {
        let spec = BlockSpec::from_data(blocks, 0.0, 0.0, &data).unwrap();
        let out = run(&build_consensus(&spec, &data).unwrap(), Subroutine::S1);
        let err = norm_inf(&sub(&consensus_copy(&out), &w_ls));
        assert!(err <= 1e-6, "{blocks} blocks: {err}");
    }
}

fn bits(m: &Matrix) -> Vec<u64> {
    m.as_slice().iter().map(|v| v.to_bits()).collect()
}

#[test]
fn unmixing_data_is_deterministic_at_full_scale() {
    let a = synth_unmixing(2024, 224, 50, 9, 30.0).unwrap();
    let b = synth_unmixing(2024, 224, 50, 9, 30.0).unwrap();
    assert_eq!(a.dims(), (224, 50, 9));
    for (x, y) in [(&a.phi, &b.phi), (&a.w0, &b.w0), (&a.y, &b.y), (&a.a_weights, &b.a_weights)] {
        assert_eq!(bits(x), bits(y));
    }
    assert_eq!(a.b_weights.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.b_weights.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    assert_ne!(bits(&a.y), bits(&synth_unmixing(2025, 224, 50, 9, 30.0).unwrap().y));
}

proptest! {
    #[test]
    fn libsvm_round_trip(
        rows in 1usize..6,
        cols in 1usize..6,
        entries in proptest::collection::vec(prop_oneof![Just(0.0), -1e3f64..1e3], 36),
        labels in proptest::collection::vec(-5.0f64..5.0, 6),
    ) {
        let features = Matrix::from_vec(rows, cols, entries[..rows * cols].to_vec()).unwrap();
        let data = Dataset::new(features, labels[..rows].to_vec(), DataSource::Text).unwrap();
        let back = parse_libsvm(&write_libsvm(&data)).unwrap();
        prop_assert_eq!(back.features.shape(), data.features.shape());
        prop_assert_eq!(bits(&back.features), bits(&data.features));
        prop_assert_eq!(back.labels, data.labels);
    }
}
