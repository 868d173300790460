//! Data-parallel kernels with a sequential fallback.
//!
//! With the default `parallel` feature the hot loops run on rayon; without it
//! every entry point below degrades to a plain sequential loop. Reductions are
//! chunked and folded in a fixed order so that results are bit-identical
//! across thread counts and between the two modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk size for ordered reductions and row partitioning.
const CHUNK: usize = 4096;

/// Dot product with deterministic chunked summation.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let partials = map_chunks(a, |off, chunk| {
        let mut s = 0.0;
        for (x, y) in chunk.iter().zip(&b[off..off + chunk.len()]) {
            s += x * y;
        }
        s
    });
    partials.into_iter().sum()
}

/// Sequential dot with the same chunked summation order as [`dot`].
pub fn dot_seq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut total = 0.0;
    for (ci, chunk) in a.chunks(CHUNK).enumerate() {
        let off = ci * CHUNK;
        let mut s = 0.0;
        for (x, y) in chunk.iter().zip(&b[off..off + chunk.len()]) {
            s += x * y;
        }
        total += s;
    }
    total
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for_each_chunk_mut(y, |off, out| {
        let len = out.len();
        for (o, xi) in out.iter_mut().zip(&x[off..off + len]) {
            *o += alpha * xi;
        }
    });
}

pub fn scale(alpha: f64, y: &mut [f64]) {
    for_each_chunk_mut(y, |_, out| {
        for o in out.iter_mut() {
            *o *= alpha;
        }
    });
}

/// Map fixed-size chunks of `a` to partial values, preserving chunk order.
fn map_chunks<F>(a: &[f64], f: F) -> Vec<f64>
where
    F: Fn(usize, &[f64]) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    {
        a.par_chunks(CHUNK)
            .enumerate()
            .map(|(ci, chunk)| f(ci * CHUNK, chunk))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        a.chunks(CHUNK)
            .enumerate()
            .map(|(ci, chunk)| f(ci * CHUNK, chunk))
            .collect()
    }
}

/// Run `f(offset, chunk)` over disjoint mutable chunks of `out`.
pub fn for_each_chunk_mut<F>(out: &mut [f64], f: F)
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    #[cfg(feature = "parallel")]
    {
        out.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(ci, chunk)| f(ci * CHUNK, chunk));
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(ci, chunk)| f(ci * CHUNK, chunk));
    }
}

/// Run `f(block_index, block)` over disjoint mutable blocks of equal length.
/// Used for photon-block-parallel operator application.
pub fn for_each_block_mut<F>(out: &mut [f64], block_len: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    debug_assert_eq!(out.len() % block_len, 0);
    #[cfg(feature = "parallel")]
    {
        out.par_chunks_mut(block_len)
            .enumerate()
            .for_each(|(b, block)| f(b, block));
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.chunks_mut(block_len)
            .enumerate()
            .for_each(|(b, block)| f(b, block));
    }
}

/// Sequential counterpart of [`for_each_block_mut`] for benchmarking.
pub fn for_each_block_mut_seq<F>(out: &mut [f64], block_len: usize, f: F)
where
    F: Fn(usize, &mut [f64]),
{
    out.chunks_mut(block_len)
        .enumerate()
        .for_each(|(b, block)| f(b, block));
}

/// Ordered parallel map over an index range; results come back in input order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_sequential_chunking_exactly() {
        let n = 3 * CHUNK + 17;
        let a: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 1.3).cos()).collect();
        assert_eq!(dot(&a, &b), dot_seq(&a, &b));
    }

    #[test]
    fn axpy_and_scale_agree_with_reference() {
        let x = vec![1.0, 2.0, 3.0];
        let mut y = vec![0.5, 0.5, 0.5];
        axpy(2.0, &x, &mut y);
        assert_eq!(y, vec![2.5, 4.5, 6.5]);
        scale(0.5, &mut y);
        assert_eq!(y, vec![1.25, 2.25, 3.25]);
    }
}
