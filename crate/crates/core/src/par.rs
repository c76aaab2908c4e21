//! Deterministic data-parallel helpers.
//!
//! Reductions split the index range into fixed chunks of [`CHUNK`] elements,
//! sum each chunk sequentially and then add the chunk sums left to right. The
//! result is therefore independent of the number of worker threads.

use rayon::prelude::*;

pub const CHUNK: usize = 4096;

/// Sum `f(i)` for `i in 0..n` in a fixed order.
pub fn sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            acc
        })
        .collect();
    partial.iter().sum()
}

/// Maximum of `f(i)` (NaN-free inputs assumed); `-inf` for an empty range.
pub fn max<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    (0..n)
        .into_par_iter()
        .map(&f)
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// Fill a new vector with `f(i)`.
pub fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..n).into_par_iter().map(&f).collect()
}
