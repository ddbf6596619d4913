use rayon::prelude::*;

use crate::error::{Error, Result};

/// Maps `f` over `0..n` on a dedicated pool of `threads` workers (0 = one per core).
///
/// Results come back in index order, so output never depends on the worker count.
pub(crate) fn map_indexed<T, F>(n: usize, threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(&f).collect()))
}
