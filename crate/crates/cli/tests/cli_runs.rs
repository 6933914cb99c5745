// End-to-end runs of the `alia` binary on small configs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SCALAR: &str = r#"{
  "f1": {"kind": "zero", "dim": 1},
  "f2": {"kind": "quadratic", "matrix": [[1.0]], "linear": [0.0]},
  "g1": {"kind": "zero", "dim": 1},
  "g2": {"kind": "zero", "dim": 1},
  "a": [[1.0]], "b": [[-1.0]], "c": [0.0],
  "start": {"x": [1.0], "y": [0.0], "u": [0.0]}
}"#;

fn alia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alia")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn scalar_config(dir: &Path, solvers: &str, stopping: &str) -> PathBuf {
    write(dir, "scalar.json", SCALAR);
    let config = format!(
        r#"{{"problem":{{"kind":"custom-file","path":"scalar.json"}},"solvers":{solvers},"stopping":{stopping},"output":"{}"}}"#,
        dir.join("out").display()
    );
    write(dir, "config.json", &config)
}

fn run(config: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    alia(&args)
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

/// Trace text with the trailing wall-clock column cut off every line.
fn without_timing(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_owned() + "\n")
        .collect()
}

#[test]
fn scalar_instance_converges_with_positive_stepsizes() {
    let dir = TempDir::new().unwrap();
    let config = scalar_config(dir.path(), r#"[{"kind":"alia_s1"}]"#, "{}");
    let out = run(&config, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&dir.path().join("out"));
    let entry = &s["solvers"][0];
    assert_eq!(entry["status"], "converged");
    let min_gamma = entry["min_gamma"].as_f64().unwrap();
    // the first step is 1/4 by hand, so the minimum cannot exceed it
    assert!(min_gamma > 0.0 && min_gamma <= 0.25, "{min_gamma}");
    let trace = rows(&dir.path().join("out/alia_s1.trace.csv"));
    assert_eq!(trace.len() as u64, entry["iterations"].as_u64().unwrap());
    assert_eq!(&trace[0][..3], ["1", "0.25", "dual_cap"]);
    // slack columns stay empty without --verify
    assert!(trace.iter().all(|r| r[13..16].iter().all(String::is_empty)));
}

#[test]
fn zero_iteration_budget_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let config = scalar_config(dir.path(), r#"[{"kind":"alia_s2"}]"#, r#"{"max_iters":0}"#);
    let out = run(&config, &[]);
    assert_eq!(out.status.code(), Some(2));
    let text = std::fs::read_to_string(dir.path().join("out/alia_s2.trace.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    let s = summary(&dir.path().join("out"));
    assert_eq!(s["solvers"][0]["status"], "max_iters");
    assert_eq!(s["solvers"][0]["iterations"], 0);
    assert!(s["solvers"][0]["min_gamma"].is_null());
}

fn lasso_config(dir: &Path, out: &str, verify: bool) -> PathBuf {
    let config = format!(
        r#"{{"problem":{{"kind":"dual_lasso","lambda":0.1}},
            "data":{{"synthetic":{{"seed":4,"m":20,"n":5}}}},
            "solvers":[{{"kind":"alia_s1"}},{{"kind":"alia_s2"}},{{"kind":"flip_admm"}},{{"kind":"alia_s2","name":"s2_small","sigma":0.5,"gamma0":0.1}}],
            "output":"{}","verify":{verify}}}"#,
        dir.join(out).display()
    );
    write(dir, &format!("{out}.json"), &config)
}

#[test]
fn repeated_runs_give_identical_traces() {
    let dir = TempDir::new().unwrap();
    let first = lasso_config(dir.path(), "one", false);
    let second = lasso_config(dir.path(), "two", false);
    assert_eq!(run(&first, &[]).status.code(), Some(0));
    // a parallel run must not change anything but timing
    assert_eq!(run(&second, &["--jobs", "3"]).status.code(), Some(0));
    for name in ["alia_s1", "alia_s2", "flip_admm", "s2_small"] {
        let file = format!("{name}.trace.csv");
        let a = without_timing(&dir.path().join("one").join(&file));
        assert!(a.lines().count() > 2, "{name}");
        assert_eq!(a, without_timing(&dir.path().join("two").join(&file)), "{name}");
    }
    let (a, b) = (summary(&dir.path().join("one")), summary(&dir.path().join("two")));
    assert_eq!(a, b);
}

#[test]
fn verify_fills_the_slack_columns() {
    let dir = TempDir::new().unwrap();
    let config = lasso_config(dir.path(), "v", false);
    assert_eq!(run(&config, &["--verify"]).status.code(), Some(0));
    let trace = rows(&dir.path().join("v/alia_s2.trace.csv"));
    for r in &trace {
        for cell in &r[13..16] {
            let slack: f64 = cell.parse().unwrap();
            assert!(slack >= -1e-10, "{slack}");
        }
    }
}

#[test]
fn matvec_totals_grow_by_a_fixed_amount_per_iteration() {
    let dir = TempDir::new().unwrap();
    let mut totals = Vec::new();
    for iters in [10u64, 20, 35] {
        let config = scalar_config(
            dir.path(),
            r#"[{"kind":"alia_s1"},{"kind":"alia_s2"}]"#,
            &format!(r#"{{"max_iters":{iters},"tol_two":1e-300,"tol_inf":1e-300}}"#),
        );
        assert_eq!(run(&config, &[]).status.code(), Some(2));
        let s = summary(&dir.path().join("out"));
        for entry in s["solvers"].as_array().unwrap() {
            assert_eq!(entry["iterations"].as_u64().unwrap(), iters);
            let c = &entry["counts"];
            totals.push((iters, c["matvec"].as_u64().unwrap(), c["prox"].as_u64().unwrap(), c["grad"].as_u64().unwrap()));
        }
    }
    // per solver: totals are affine in the iteration count with one slope
    for solver in 0..2 {
        let t: Vec<_> = totals.iter().skip(solver).step_by(2).collect();
        let slope = (t[1].1 - t[0].1) / (t[1].0 - t[0].0);
        assert_eq!(t[2].1 - t[1].1, slope * (t[2].0 - t[1].0));
        assert_eq!(slope, 4);
        assert_eq!(t[0].2, 2 * t[0].0);
    }
}

#[test]
fn bad_configs_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let typo = write(
        dir.path(),
        "typo.json",
        r#"{"problem":{"kind":"dual_lasso","lambda":0.1},"data":{"synthetic":{"seed":1,"m":20,"n":5}},"solvers":[{"kind":"alia_s2","sigmma":2}]}"#,
    );
    let out = run(&typo, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solvers[0].sigmma"));
    let check = alia(&["check", typo.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(1));

    let negative = write(
        dir.path(),
        "neg.json",
        r#"{"problem":{"kind":"dual_lasso","lambda":0.1},"data":{"synthetic":{"seed":1,"m":20,"n":5}},"solvers":[{"kind":"alia_s2"}],"stopping":{"tol_two":-1}}"#,
    );
    let out = run(&negative, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stopping.tol_two"));

    let missing = write(
        dir.path(),
        "missing.json",
        r#"{"problem":{"kind":"dual_svm","c":1},"data":{"libsvm":"nowhere.svm"},"solvers":[{"kind":"alia_s1"}]}"#,
    );
    let out = run(&missing, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.svm"));
    assert_eq!(alia(&["run", dir.path().join("absent.json").to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn libsvm_data_resolves_next_to_the_config() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "pair.svm", "+1 1:1\n-1 1:-1\n");
    let config = write(
        dir.path(),
        "svm.json",
        &format!(
            r#"{{"problem":{{"kind":"dual_svm","C":1}},"data":{{"libsvm":"pair.svm"}},"solvers":[{{"kind":"alia_s2"}}],"output":"{}"}}"#,
            dir.path().join("svm_out").display()
        ),
    );
    assert_eq!(alia(&["check", config.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(run(&config, &[]).status.code(), Some(0));
    assert_eq!(summary(&dir.path().join("svm_out"))["problem"], "dual_svm");
}

#[test]
fn out_flag_overrides_the_config() {
    let dir = TempDir::new().unwrap();
    let config = scalar_config(dir.path(), r#"[{"kind":"alia_s2"}]"#, "{}");
    let target = dir.path().join("elsewhere");
    assert_eq!(run(&config, &["--out", target.to_str().unwrap()]).status.code(), Some(0));
    assert!(target.join("alia_s2.trace.csv").is_file());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn roots_prints_the_real_roots() {
    let out = alia(&["roots", "1", "-6", "11", "-6"]);
    assert_eq!(out.status.code(), Some(0));
    let roots: Vec<f64> = String::from_utf8_lossy(&out.stdout).lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(roots.len(), 3);
    for (r, expected) in roots.iter().zip([1.0, 2.0, 3.0]) {
        assert!((r - expected).abs() <= 1e-12, "{roots:?}");
    }
    // t² + 1 has none
    assert_eq!(alia(&["roots", "0", "1", "0", "1"]).stdout.len(), 0);
}
