//! Descent on a problem's target and trajectory output.

use std::io::Write;

use crdc_core::mtl::{run_algorithm1, MtlWeights};
use crdc_core::{solver, DescentConfig, Executor, Mode, SolveError, Trajectory, Vector};

use crate::problem::Problem;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("nothing to run: the file designates no result")]
    NoTarget,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    /// Shared and per-task blocks of the final state, for MTL problems.
    pub weights: Option<MtlWeights>,
}

/// Runs the target from `init` (the file's initial point when absent).
pub fn run_problem<E: Executor>(
    p: &Problem,
    cfg: &DescentConfig,
    init: Option<&Vector>,
    exec: &E,
) -> Result<RunOutcome, RunError> {
    let target = p.target().ok_or(RunError::NoTarget)?;
    let start = match init {
        Some(x) => x.clone(),
        None => p.init().ok_or(RunError::NoTarget)?,
    };
    match (target.mtl, cfg.mode) {
        (Some(m), Mode::Distributed) => {
            let (w, trajectory) = run_algorithm1(m, &start, cfg, exec)?;
            Ok(RunOutcome { trajectory, weights: Some(w) })
        }
        (m, _) => {
            let trajectory = solver::run(target.optimizer, &start, cfg, exec)?;
            let weights = m.map(|m| m.split(trajectory.final_state()));
            Ok(RunOutcome { trajectory, weights })
        }
    }
}

/// `iter,x_0,…,x_{n-1},grad_norm`, one row per visited state.
pub fn write_trajectory<W: Write>(out: W, t: &Trajectory) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = t.states.first().map_or(0, Vector::dim);
    let mut header = vec!["iter".to_string()];
    header.extend((0..n).map(|i| format!("x_{i}")));
    header.push("grad_norm".into());
    w.write_record(&header)?;
    for (k, (x, g)) in t.states.iter().zip(&t.grad_norms).enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(x.entries().iter().map(ToString::to_string));
        row.push(g.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crdc_core::{Scalar, ScalarKind, Sequential};
    use std::path::Path;

    fn mtl2() -> Problem {
        Problem::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("problems/mtl2.json")).unwrap()
    }

    #[test]
    fn csv_layout() {
        let p = mtl2();
        let cfg = p.config(Some("1/2"), Some(1), None, Mode::Distributed).unwrap();
        let out = run_problem(&p, &cfg, None, &Sequential).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &out.trajectory).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iter,x_0,x_1,x_2,grad_norm");
        assert_eq!(lines[1], "0,0/1,0/1,0/1,8/1");
        assert!(lines[2].starts_with("1,4/1,"));
        assert_eq!(out.weights.unwrap().shared, Vector::from_ints(ScalarKind::Rational, &[4]));
    }

    #[test]
    fn modes_agree_on_mtl2() {
        let p = mtl2();
        let mono = run_problem(&p, &p.config(None, Some(100), None, Mode::Monolithic).unwrap(), None, &Sequential).unwrap();
        let dist = run_problem(&p, &p.config(None, Some(100), None, Mode::Distributed).unwrap(), None, &crate::Rayon).unwrap();
        assert_eq!(mono, dist);
    }

    #[test]
    fn divergence_and_missing_target() {
        let p = mtl2();
        let cfg = p.config(Some("2"), None, None, Mode::Distributed).unwrap();
        assert!(matches!(run_problem(&p, &cfg, None, &Sequential), Err(RunError::Solve(SolveError::Diverged { .. }))));
        let empty = Problem::parse(r#"{"domain": "rational"}"#, Path::new(".")).unwrap();
        let cfg = DescentConfig::new(Scalar::rational(1, 10), Some(1), None).unwrap();
        assert!(matches!(run_problem(&empty, &cfg, None, &Sequential), Err(RunError::NoTarget)));
    }
}
