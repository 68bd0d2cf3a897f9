//! Parallel execution of independent work items with ordered collection.

use anyhow::{Context, Result};
use rayon::prelude::*;

/// Thread count for `--workers`; 0 selects the available parallelism.
pub fn resolve_workers(workers: usize) -> usize {
    if workers > 0 {
        workers
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

/// Evaluates `f(0..n)` on `workers` threads and returns the results in index
/// order, independent of completion order.
pub fn map_indexed<T, F>(workers: usize, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_workers(workers))
        .build()
        .context("cannot start worker pool")?;
    Ok(pool.install(|| (0..n).into_par_iter().map(&f).collect()))
}
