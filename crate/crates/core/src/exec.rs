//! Execution strategy for the data-parallel loops (k-shards of the
//! configuration space, k-summands of the identities, random trials).
//!
//! Every parallel path maps independent work items and then folds the
//! results sequentially in item order, so output is identical whichever
//! strategy runs. Without the `parallel` feature, `Exec::Parallel` falls back
//! to sequential execution.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this build can actually run work in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    /// `items.iter().map(f).collect()`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }
}
