//! Data-parallel batch helpers with a sequential fallback.
//!
//! With the default `parallel` feature the indexed map runs on the rayon
//! pool; without it the same code path degrades to a plain loop. Results are
//! collected in index order either way, so output is bit-identical for any
//! worker count. The explicitly sequential variants stay available for the
//! benchmark suite to compare against.

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

/// Sequential indexed map, kept for benchmarking against the parallel path.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Sum with a fixed pairwise reduction tree.
///
/// Deterministic for a given input order and more accurate than a running
/// sum on long inputs; used wherever batch statistics are reduced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const CHUNK: usize = 64;
    if xs.len() <= CHUNK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
