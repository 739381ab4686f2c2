//! Batch evaluation strategy.
//!
//! Solvers hand independent, index-keyed jobs to a [`BatchExecutor`] and
//! consume the results in index order. Because every job derives its own
//! random stream from its index, any executor that preserves the output
//! order yields identical results.

use alloc::vec::Vec;

pub trait BatchExecutor: Sync {
    /// Returns `[f(0), f(1), ..., f(n - 1)]`.
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl BatchExecutor for Sequential {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
