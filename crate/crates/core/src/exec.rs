//! Data-parallel execution with a sequential fallback.
//!
//! With the `parallel` feature (default) the [`Execution::Parallel`] mode runs
//! on the rayon global pool. Without it every mode runs sequentially. Callers
//! only use order-independent reductions or index-ordered collection, so
//! results are identical in both modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether work actually fans out across threads in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `0..n`, returning results in index order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Max-reduction of `f` over `0..n`. Returns `init` for empty ranges.
pub fn max_indexed<F>(exec: Execution, n: usize, init: f64, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).reduce(|| init, f64::max);
    }
    let _ = exec;
    (0..n).map(f).fold(init, f64::max)
}
