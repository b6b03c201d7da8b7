//! Deterministic data-parallel helpers.
//!
//! With the `parallel` feature the work is spread over the rayon pool, otherwise
//! it runs on the calling thread. Results are always collected in index order,
//! and each item is computed by the same code either way, so outputs are
//! bitwise identical across the two builds and across thread counts.

/// Below this many items the sequential path is used even when `parallel` is on.
pub const MIN_PARALLEL_ITEMS: usize = 64;

/// Evaluates `f(i)` for `i in 0..len` and returns the results in order.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_with_threshold(len, MIN_PARALLEL_ITEMS, f)
}

/// Like [`map_indexed`] but with a caller-chosen cut-over, for work items that
/// are individually expensive (solves, Newton starts).
pub fn map_indexed_with_threshold<T, F>(len: usize, threshold: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if len >= threshold {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    let _ = threshold;
    (0..len).map(f).collect()
}

/// Whether this build spreads work across threads.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
