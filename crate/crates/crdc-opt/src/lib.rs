//! Problem files, CSV task data, string diagram export and threaded
//! execution on top of [`crdc_core`].

pub mod check;
pub mod csv_task;
pub mod diagram;
pub mod exec;
pub mod problem;
pub mod run;

pub use check::check_problem;
pub use csv_task::{load_csv_task, LoadError, LossKind};
pub use diagram::{Diagram, Labels};
pub use exec::Rayon;
pub use problem::{Problem, ProblemError, Target};
pub use run::{run_problem, write_trajectory, RunError, RunOutcome};
