use crdc_core::Executor;
use rayon::prelude::*;

/// Runs jobs on the rayon thread pool. Results come back in job order, so
/// reductions over them are as deterministic as with [`crdc_core::Sequential`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl Executor for Rayon {
    fn run<T, F>(&self, jobs: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..jobs).into_par_iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crdc_core::Sequential;

    #[test]
    fn order_is_job_order() {
        let par = Rayon.run(1000, |i| i * i);
        let seq = Sequential.run(1000, |i| i * i);
        assert_eq!(par, seq);
    }
}
