//! Thin execution layer over rayon. With the `parallel` feature disabled every
//! helper degrades to the equivalent sequential iterator, so numerical results
//! never depend on the build flavour or the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fixed reduction block. Partial sums are formed per block and combined in
/// block order, which keeps floating point sums independent of scheduling.
pub(crate) const REDUCE_BLOCK: usize = 4096;

pub(crate) fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

pub(crate) fn for_each_indexed<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    for_each_chunk_mut(data, REDUCE_BLOCK, |b, chunk| {
        let base = b * REDUCE_BLOCK;
        for (i, v) in chunk.iter_mut().enumerate() {
            f(base + i, v);
        }
    });
}

/// Deterministic sum of `term(i)` for `i in 0..len`.
pub(crate) fn sum<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = len.div_ceil(REDUCE_BLOCK);
    let partial = |b: usize| {
        let lo = b * REDUCE_BLOCK;
        let hi = (lo + REDUCE_BLOCK).min(len);
        (lo..hi).map(&term).sum::<f64>()
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<f64> = (0..blocks).into_par_iter().map(partial).collect();
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<f64> = (0..blocks).map(partial).collect();
    parts.into_iter().sum()
}

/// Maximum of `term(i)`; NaN terms propagate.
pub(crate) fn max<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let fold = |acc: f64, v: f64| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) };
    let blocks = len.div_ceil(REDUCE_BLOCK);
    let partial = |b: usize| {
        let lo = b * REDUCE_BLOCK;
        let hi = (lo + REDUCE_BLOCK).min(len);
        (lo..hi).map(&term).fold(f64::NEG_INFINITY, fold)
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<f64> = (0..blocks).into_par_iter().map(partial).collect();
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<f64> = (0..blocks).map(partial).collect();
    parts.into_iter().fold(f64::NEG_INFINITY, fold)
}

pub(crate) fn map_collect<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..len).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return (0..len).map(f).collect();
}
