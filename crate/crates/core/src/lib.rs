//! Compositional generalized gradient descent.
//!
//! Open objectives (spans of exact linear maps decorated with an objective
//! term) compose by variable sharing. The gradient descent functor sends each
//! to an open dynamical system decorated with its negative generalized
//! gradient, and composites of those systems execute as distributed
//! message-passing descent.
//!
//! The crate is `no_std` and needs only `alloc`. IO, file formats and
//! threaded execution live in the `crdc-opt` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dynam;
pub mod exec;
pub mod gd;
pub mod gen;
pub mod harness;
pub mod linmap;
pub mod mtl;
pub mod opt;
pub mod poly;
pub mod rdiff;
pub mod scalar;
pub mod sexpr;
pub mod simplify;
pub mod solver;
pub mod span;
pub mod term;

pub use dynam::OpenDynam;
pub use exec::{Executor, Sequential};
pub use gd::{gd_component, gd_functor};
pub use harness::LawReport;
pub use linmap::{pullback, LinMap, PullbackData, Solution};
pub use mtl::{build_mtl, run_algorithm1, MtlProblem, TaskSpec};
pub use opt::OpenObjective;
pub use poly::{poly_canonical, Poly};
pub use rdiff::{forward, grad, is_linear, reverse};
pub use scalar::{Dim, Rational, Ring, Scalar, ScalarKind, Vector};
pub use sexpr::parse_term;
pub use simplify::simplify;
pub use solver::{DescentConfig, ExecutionPlan, Mode, SolveError, Trajectory};
pub use span::{Generator, Span, SpanError};
pub use term::{eval, typecheck, DomainTag, Expr, Node, Term};
