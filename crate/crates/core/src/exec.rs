//! Data-parallel map over independent work items.
//!
//! With the `parallel` feature the items are distributed over the rayon
//! pool; without it, or with [`Execution::Sequential`], they run in order on
//! the calling thread. Results always come back in index order, so anything
//! reduced from them is independent of scheduling.

/// How independent work items (ensemble runs, sweep points, oracle columns)
/// are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when items will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}
