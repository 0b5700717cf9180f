//! Execution policy for the data-parallel inner loops.
//!
//! Every parallel loop in this crate is a pure per-element map whose results
//! are collected in input order, so switching between [`Execution::Sequential`]
//! and [`Execution::Parallel`] never changes output values.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Runs on the current rayon pool. Without the `parallel` feature this is
    /// identical to `Sequential`.
    #[default]
    Parallel,
}

impl Execution {
    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect(),
            _ => items.iter().enumerate().map(|(i, x)| f(i, x)).collect(),
        }
    }

    /// Maps `f` over `0..n`, preserving order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }
}

/// Runs `op` with parallel loops limited to `threads` workers.
///
/// `threads == 0` uses the global pool. With `threads == 1`, or without the
/// `parallel` feature, everything runs on the calling thread.
pub fn with_threads<R, F>(threads: usize, op: F) -> R
where
    R: Send,
    F: FnOnce(Execution) -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match threads {
            0 => op(Execution::Parallel),
            1 => op(Execution::Sequential),
            n => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(|| op(Execution::Parallel)),
                Err(_) => op(Execution::Parallel),
            },
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        op(Execution::Sequential)
    }
}

/// Number of worker threads a parallel loop will use right now.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
