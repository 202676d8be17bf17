use std::path::PathBuf;
use std::process::{Command, Output};

use crdc_core::{Mode, Scalar, Sequential};
use crdc_opt::{run_problem, Problem, Rayon};
use proptest::prelude::*;

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("problems").join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crdc-opt")).args(args).output().expect("binary runs")
}

#[test]
fn run_writes_trajectory_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let file = problem("mtl2.json");
    let o = cli(&["run", file.to_str().unwrap(), "--max-iters", "5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "iter,x_0,x_1,x_2,grad_norm");
    assert_eq!(lines.len(), 7);
    let summary = String::from_utf8(o.stdout).unwrap();
    assert!(summary.contains("iterations: 5"));
    assert!(summary.contains("W0: ["));
}

#[test]
fn exit_codes() {
    let file = problem("mtl2.json");
    let f = file.to_str().unwrap();
    assert_eq!(cli(&["check", f, "--trials", "10"]).status.code(), Some(0));
    assert_eq!(cli(&["run", f, "--gamma", "2"]).status.code(), Some(3));
    assert_eq!(cli(&["run", f, "--gamma", "fast"]).status.code(), Some(2));
    assert_eq!(cli(&["run", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn dot_shares_topology_between_views() {
    let file = problem("chain.json");
    let f = file.to_str().unwrap();
    let obj = String::from_utf8(cli(&["dot", f]).stdout).unwrap();
    let opt = String::from_utf8(cli(&["dot", f, "--which", "optimizer"]).stdout).unwrap();
    let edges = |s: &str| s.lines().filter(|l| l.contains("->")).map(str::to_owned).collect::<Vec<_>>();
    assert!(obj.starts_with("digraph objective {"));
    assert!(opt.starts_with("digraph optimizer {"));
    assert!(!edges(&obj).is_empty());
    assert_eq!(edges(&obj), edges(&opt));
}

#[test]
fn grad_prints_a_term() {
    let file = problem("mtl2.json");
    let o = cli(&["grad", file.to_str().unwrap(), "--name", "mtl"]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().trim_start().starts_with('('));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn modes_agree_for_any_step_size(num in 1i64..20, iters in 1usize..40) {
        let p = Problem::load(&problem("mtl2.json")).unwrap();
        let gamma = Scalar::rational(num, 100).to_string();
        let mono = run_problem(&p, &p.config(Some(&gamma), Some(iters), None, Mode::Monolithic).unwrap(), None, &Sequential).unwrap();
        let dist = run_problem(&p, &p.config(Some(&gamma), Some(iters), None, Mode::Distributed).unwrap(), None, &Rayon).unwrap();
        prop_assert_eq!(mono, dist);
    }
}
