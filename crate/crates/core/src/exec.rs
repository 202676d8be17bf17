//! Execution of independent jobs.
//!
//! Law checks evaluate many pure trials and the distributed solver evaluates
//! one job per subsystem per step. Both go through [`Executor`], so the
//! threaded implementation can live outside this `no_std` crate.

use alloc::vec::Vec;

/// Runs `jobs` independent closures and returns their results in job order.
pub trait Executor: Sync {
    fn run<T, F>(&self, jobs: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn run<T, F>(&self, jobs: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..jobs).map(f).collect()
    }
}
