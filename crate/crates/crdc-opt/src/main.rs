use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use crdc_core::{grad, Mode, SolveError};
use crdc_opt::{check_problem, run_problem, write_trajectory, Labels, Problem, Rayon, RunError};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "crdc-opt", version, about = "Compose open objectives and run distributed gradient descent")]
struct Cli {
    /// Seeds every randomized check.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Mono,
    Dist,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Objective,
    Optimizer,
}

#[derive(Subcommand)]
enum Command {
    /// Check functor laws and the optimizer equivalence on the file's composites.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Run gradient descent on the result (or the MTL block) and write the trajectory.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "dist")]
        mode: ModeArg,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        tol: Option<String>,
        /// Trajectory CSV; `-` writes to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the string diagram as Graphviz DOT.
    Dot {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "objective")]
        which: Which,
    },
    /// Print the gradient term of a named objective (`mtl` for the MTL composite).
    Grad {
        file: PathBuf,
        #[arg(long)]
        name: Option<String>,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn load(path: &Path) -> Result<Problem, ExitCode> {
    Problem::load(path).map_err(|e| fail(EXIT_INPUT, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { file, trials } => check(&file, trials, cli.seed),
        Command::Run { file, mode, gamma, max_iters, tol, out } => {
            run(&file, mode, gamma.as_deref(), max_iters, tol.as_deref(), out.as_deref())
        }
        Command::Dot { file, which } => dot(&file, which),
        Command::Grad { file, name } => gradient(&file, name.as_deref()),
    };
    result.unwrap_or_else(|code| code)
}

fn check(file: &Path, trials: usize, seed: u64) -> Result<ExitCode, ExitCode> {
    let p = load(file)?;
    let reports = check_problem(&p, trials, seed, &Rayon);
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} laws, {} failed", reports.len(), failed);
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(EXIT_CHECK_FAILED) })
}

fn run(
    file: &Path,
    mode: ModeArg,
    gamma: Option<&str>,
    max_iters: Option<usize>,
    tol: Option<&str>,
    out: Option<&Path>,
) -> Result<ExitCode, ExitCode> {
    let p = load(file)?;
    let mode = match mode {
        ModeArg::Mono => Mode::Monolithic,
        ModeArg::Dist => Mode::Distributed,
    };
    let cfg = p.config(gamma, max_iters, tol, mode).map_err(|e| fail(EXIT_INPUT, e))?;
    let outcome = match run_problem(&p, &cfg, None, &Rayon) {
        Ok(o) => o,
        Err(RunError::Solve(e @ SolveError::Diverged { .. })) => return Err(fail(EXIT_DIVERGED, e)),
        Err(e) => return Err(fail(EXIT_INPUT, e)),
    };
    let to_stdout = out == Some(Path::new("-"));
    if let Some(path) = out {
        let written = if to_stdout {
            write_trajectory(io::stdout().lock(), &outcome.trajectory)
        } else {
            let f = File::create(path).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", path.display())))?;
            write_trajectory(BufWriter::new(f), &outcome.trajectory)
        };
        written.map_err(|e| fail(EXIT_INPUT, e))?;
    }
    let mut summary: Box<dyn Write> = if to_stdout { Box::new(io::stderr()) } else { Box::new(io::stdout()) };
    let t = &outcome.trajectory;
    let state: Vec<String> = t.final_state().entries().iter().map(ToString::to_string).collect();
    let norm = t.grad_norms.last().expect("one norm per state");
    let _ = writeln!(summary, "iterations: {}", t.iterations());
    let _ = writeln!(summary, "converged: {}", t.converged);
    let _ = writeln!(summary, "final state: [{}]", state.join(", "));
    let _ = writeln!(summary, "final grad norm: {norm}");
    if let Some(w) = &outcome.weights {
        let show = |v: &crdc_core::Vector| v.entries().iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
        let _ = writeln!(summary, "W0: [{}]", show(&w.shared));
        for (i, wi) in w.tasks.iter().enumerate() {
            let _ = writeln!(summary, "W{}: [{}]", i + 1, show(wi));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn dot(file: &Path, which: Which) -> Result<ExitCode, ExitCode> {
    let p = load(file)?;
    let (name, labels) = match which {
        Which::Objective => ("objective", Labels::Objective),
        Which::Optimizer => ("optimizer", Labels::Optimizer),
    };
    let text = match p.target() {
        Some(t) => t.diagram.to_dot(name, labels),
        None => crdc_opt::Diagram::empty().to_dot(name, labels),
    };
    print!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn gradient(file: &Path, name: Option<&str>) -> Result<ExitCode, ExitCode> {
    let p = load(file)?;
    let objective = match name {
        None => p.target().map(|t| t.objective.objective().clone()),
        Some("mtl") => p.mtl().map(|m| m.problem.composite().objective().clone()),
        Some(n) => p.entry(n).map(|e| e.objective.objective().clone()),
    };
    let Some(objective) = objective else {
        return Err(fail(EXIT_INPUT, format!("no objective named `{}`", name.unwrap_or("result"))));
    };
    let g = grad(&objective).map_err(|e| fail(EXIT_INPUT, e))?;
    println!("{g}");
    Ok(ExitCode::SUCCESS)
}
