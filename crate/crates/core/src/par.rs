//! Deterministic data-parallel reductions.
//!
//! Every reduction here splits the input into fixed-size chunks, reduces each
//! chunk sequentially, and combines chunk results in index order. The
//! sequential fallbacks chunk the same way, so results are bit-identical
//! regardless of thread count or whether the `parallel` feature is enabled.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk size for all reductions. Fixed so the summation tree never depends
/// on thread count.
pub const CHUNK: usize = 256;

/// Sum of `f(item)` over all items, sequential path.
pub fn sum_f64_seq<T: Sync, F: Fn(&T) -> f64 + Sync + Send>(items: &[T], f: F) -> f64 {
    items
        .chunks(CHUNK)
        .map(|chunk| chunk.iter().map(&f).sum::<f64>())
        .sum()
}

/// Sum of `f(item)` over all items.
#[cfg(feature = "parallel")]
pub fn sum_f64<T: Sync, F: Fn(&T) -> f64 + Sync + Send>(items: &[T], f: F) -> f64 {
    let partials: Vec<f64> = items
        .par_chunks(CHUNK)
        .map(|chunk| chunk.iter().map(&f).sum::<f64>())
        .collect();
    partials.iter().sum()
}

#[cfg(not(feature = "parallel"))]
pub fn sum_f64<T: Sync, F: Fn(&T) -> f64 + Sync + Send>(items: &[T], f: F) -> f64 {
    sum_f64_seq(items, f)
}

/// Ordered map, sequential path.
pub fn map_vec_seq<T: Sync, U: Send, F: Fn(&T) -> U + Sync + Send>(items: &[T], f: F) -> Vec<U> {
    items.iter().map(f).collect()
}

/// Ordered map.
#[cfg(feature = "parallel")]
pub fn map_vec<T: Sync, U: Send, F: Fn(&T) -> U + Sync + Send>(items: &[T], f: F) -> Vec<U> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_vec<T: Sync, U: Send, F: Fn(&T) -> U + Sync + Send>(items: &[T], f: F) -> Vec<U> {
    map_vec_seq(items, f)
}

/// Accumulate per-item dense contributions into a shared-length buffer,
/// sequential path. `f` adds item `i`'s contribution into the slice.
pub fn sum_into_seq<T: Sync, F: Fn(&T, &mut [f64]) + Sync + Send>(
    items: &[T],
    len: usize,
    f: F,
) -> Vec<f64> {
    let partials: Vec<Vec<f64>> = items
        .chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; len];
            for item in chunk {
                f(item, &mut acc);
            }
            acc
        })
        .collect();
    combine(partials, len)
}

/// Accumulate per-item dense contributions into a shared-length buffer.
#[cfg(feature = "parallel")]
pub fn sum_into<T: Sync, F: Fn(&T, &mut [f64]) + Sync + Send>(items: &[T], len: usize, f: F) -> Vec<f64> {
    let partials: Vec<Vec<f64>> = items
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; len];
            for item in chunk {
                f(item, &mut acc);
            }
            acc
        })
        .collect();
    combine(partials, len)
}

#[cfg(not(feature = "parallel"))]
pub fn sum_into<T: Sync, F: Fn(&T, &mut [f64]) + Sync + Send>(items: &[T], len: usize, f: F) -> Vec<f64> {
    sum_into_seq(items, len, f)
}

fn combine(partials: Vec<Vec<f64>>, len: usize) -> Vec<f64> {
    let mut total = vec![0.0; len];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part.iter()) {
            *t += p;
        }
    }
    total
}
