// Properties that must hold on every step of every adaptive run, checked on
// random convex instances with a planted saddle point.

use alia::diagnostics::{audit_run, stepsize_floor, FloorInputs, Mode, RunAudit};
use alia::funcblocks::jacobi_svd;
use alia::problems::{planted_instance, PlantedInstance, PlantedKind};
use alia::rng::SeededRng;
use alia::solver::{solve, InitialPoint};
use alia::{Matrix, SolverOptions, Subroutine};

struct Case {
    inst: PlantedInstance,
    sigma: f64,
    init: InitialPoint,
}

fn case(i: u64, kind: PlantedKind) -> Case {
    let mut rng = SeededRng::new(7_000 + i);
    let p = 1 + rng.below(50);
    let q = 1 + rng.below(50);
    let r = 1 + rng.below(50);
    let sigma = rng.uniform_in(0.25f64.ln(), 4f64.ln()).exp();
    let inst = planted_instance(7_100 + i, p, q, r, kind).unwrap();
    let init = InitialPoint { x: rng.normal_vec(p), y: rng.normal_vec(q), u: rng.normal_vec(r) };
    Case { inst, sigma, init }
}

fn kind_of(i: u64) -> PlantedKind {
    if i.is_multiple_of(2) {
        PlantedKind::Smooth
    } else {
        PlantedKind::L1Box
    }
}

fn opts(sub: Subroutine, sigma: f64, iters: usize) -> SolverOptions {
    SolverOptions {
        sigma,
        gamma0: 1.0,
        epsilon: SolverOptions::theory_epsilon(sigma),
        subroutine: sub,
        max_iters: iters,
        // run the full horizon
        tol_two: f64::MIN_POSITIVE,
        tol_inf: f64::MIN_POSITIVE,
        verify: true,
    }
}

fn audit(c: &Case, sub: Subroutine, iters: usize) -> RunAudit {
    audit_run(&c.inst.problem, &c.inst.saddle, &opts(sub, c.sigma, iters), &c.init).unwrap()
}

fn spectral_norm(m: &Matrix) -> f64 {
    jacobi_svd(m).unwrap().s.first().copied().unwrap_or(0.0)
}

#[test]
fn step_inequalities_hold_on_every_iteration() {
    for i in 0..50 {
        let c = case(i, kind_of(i));
        for sub in [Subroutine::S1, Subroutine::S2] {
            let a = audit(&c, sub, 500);
            let tag = format!("instance {i} {sub:?}");
            assert!(a.min_slack >= -1e-10, "{tag}: slack {}", a.min_slack);
            assert!(a.max_young <= 1.0, "{tag}: Young quotient {}", a.max_young);
            assert!(a.max_growth_excess <= 0.0, "{tag}: growth excess {}", a.max_growth_excess);
            assert!(a.max_curvature_excess <= 0.0, "{tag}: ell above L by {}", a.max_curvature_excess);
            assert!(a.min_curvature >= -1e-12, "{tag}: ell {}", a.min_curvature);
            assert!(a.gammas.iter().all(|g| *g > 0.0), "{tag}");
        }
    }
}

#[test]
fn energy_is_nonincreasing_and_rate_holds() {
    for i in 0..20 {
        let c = case(i, kind_of(i));
        for sub in [Subroutine::S1, Subroutine::S2] {
            let a = audit(&c, sub, 501);
            let tag = format!("instance {i} {sub:?}");
            assert!(a.max_energy_increase() <= 1e-9, "{tag}: increase {}", a.max_energy_increase());
            assert!(a.gaps.iter().all(|g| *g >= -1e-9), "{tag}: negative gap");
            for k in [10, 100, 500] {
                let m = a.rate_margin(k).expect("run covers the horizon");
                assert!(m >= -1e-9, "{tag}: K = {k}, margin {m}");
            }
        }
    }
}

#[test]
fn stepsizes_stay_above_the_floor() {
    for i in 0..20 {
        let c = case(100 + i, PlantedKind::Smooth);
        let pr = &c.inst.problem;
        for (sub, mode) in [(Subroutine::S1, Mode::S1), (Subroutine::S2, Mode::S2)] {
            let o = opts(sub, c.sigma, 500);
            let floor = stepsize_floor(
                mode,
                &FloorInputs {
                    gamma0: o.gamma0,
                    sigma: o.sigma,
                    epsilon: o.epsilon,
                    lip_f: spectral_norm(&c.inst.hess_f),
                    lip_g: spectral_norm(&c.inst.hess_g),
                    norm_a: spectral_norm(&pr.a().to_dense()),
                    norm_b: spectral_norm(&pr.b().to_dense()),
                },
            )
            .unwrap();
            // stop before the iterates stall at rounding level, where the
            // local curvature estimates are noise
            let o = SolverOptions { tol_two: 1e-8, tol_inf: 1e-10, max_iters: 5_000, ..o };
            let out = solve(pr, &o, &c.init).unwrap();
            assert!(floor > 0.0);
            assert!(out.min_gamma() >= floor - 1e-12, "instance {i} {sub:?}: {} < {floor}", out.min_gamma());
        }
    }
}

#[test]
fn oracle_calls_are_constant_per_iteration() {
    for i in 0..10 {
        let c = case(200 + i, kind_of(i));
        for sub in [Subroutine::S1, Subroutine::S2, Subroutine::Fixed] {
            let mut o = opts(sub, c.sigma, 200);
            o.gamma0 = if sub == Subroutine::Fixed { 1e-3 } else { 1.0 };
            let out = solve(&c.inst.problem, &o, &c.init).unwrap();
            assert_eq!(out.trace.len(), 200);
            let first = out.trace[0].ops;
            assert_eq!((first.grad_f2, first.grad_g2, first.prox_f1, first.prox_g1), (1, 1, 1, 1));
            assert_eq!((first.apply_a, first.apply_b, first.adjoint_a, first.adjoint_b), (1, 1, 1, 1));
            assert!(out.trace.iter().all(|r| r.ops == first), "instance {i} {sub:?}");
            // setup evaluates each oracle of the initial point once
            let total = out.ops;
            assert_eq!(total.grads(), 2 * 201);
            assert_eq!(total.proxes(), 2 * 200);
            assert_eq!(total.matvecs(), 4 * 200 + 4);
        }
    }
}
