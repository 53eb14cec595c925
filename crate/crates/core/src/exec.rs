//! Data-parallel map over work items with deterministic reduction.
//!
//! With the `parallel` feature (default) the map runs on the rayon pool;
//! without it the same API runs sequentially. Either way results come back
//! in input order and all floating-point reductions go through the pairwise
//! summation below, so final numbers are identical at any thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Order-preserving map; parallel when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn map_collect<I, R, F>(items: Vec<I>, f: F) -> Vec<R>
where
    I: Send,
    R: Send,
    F: Fn(I) -> R + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

/// Order-preserving map; parallel when the `parallel` feature is enabled.
#[cfg(not(feature = "parallel"))]
pub fn map_collect<I, R, F>(items: Vec<I>, f: F) -> Vec<R>
where
    I: Send,
    R: Send,
    F: Fn(I) -> R + Sync + Send,
{
    items.into_iter().map(f).collect()
}

/// Always-sequential variant, kept available so benchmarks can compare the
/// two paths within one build.
pub fn map_collect_seq<I, R, F>(items: Vec<I>, f: F) -> Vec<R>
where
    F: Fn(I) -> R,
{
    items.into_iter().map(f).collect()
}

/// Deterministic pairwise summation (independent of thread count; depends
/// only on the slice order).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
