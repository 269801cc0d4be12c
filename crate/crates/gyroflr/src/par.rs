//! Data-parallel helpers. With the `parallel` feature these dispatch to rayon,
//! otherwise they run the same closures sequentially. Results are always
//! collected in index order so reductions done by callers stay deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f(chunk_index, chunk)` to consecutive `chunk`-sized pieces of `data`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// Like [`for_each_chunk_mut`] but keeps one return value per chunk, in order.
pub fn map_chunks_mut<T, R, F>(data: &mut [T], chunk: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(usize, &mut [T]) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return data
        .par_chunks_mut(chunk)
        .enumerate()
        .map(|(i, c)| f(i, c))
        .collect();
    #[cfg(not(feature = "parallel"))]
    return data
        .chunks_mut(chunk)
        .enumerate()
        .map(|(i, c)| f(i, c))
        .collect();
}

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return (0..n).map(f).collect();
}

/// Whether the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Runs `f` inside a dedicated pool of `threads` workers.
/// `threads == 0` uses the global pool. Without the `parallel` feature this just calls `f`.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if threads == 0 {
            return f();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(f),
            Err(e) => {
                log::warn!("could not build a {threads}-thread pool ({e}); using the global pool");
                f()
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

/// Number of worker threads that a parallel section would use right now.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    return rayon::current_num_threads();
    #[cfg(not(feature = "parallel"))]
    return 1;
}

/// Runs `f(outer, inner, line)` on every 1D line of a row-major 4D array along `axis`.
/// Lines are copied into a contiguous buffer, processed, and copied back, so `f`
/// may overwrite its line in place. `outer` indexes the axes before `axis`,
/// `inner` the axes after it. Per-line results come back in line order.
pub fn map_lines<T, R, F>(data: &mut [T], shape: [usize; 4], axis: usize, f: F) -> Vec<R>
where
    T: Copy + Default + Send + Sync,
    R: Send,
    F: Fn(usize, usize, &mut [T]) -> R + Sync + Send,
{
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    debug_assert_eq!(data.len(), n * stride * outer);
    if stride == 1 {
        return map_chunks_mut(data, n, |l, line| f(l, 0, line));
    }
    let mut buf = vec![T::default(); data.len()];
    {
        let src: &[T] = data;
        for_each_chunk_mut(&mut buf, n, |l, line| {
            let (o, inn) = (l / stride, l % stride);
            let base = o * n * stride + inn;
            for (i, v) in line.iter_mut().enumerate() {
                *v = src[base + i * stride];
            }
        });
    }
    let out = map_chunks_mut(&mut buf, n, |l, line| f(l / stride, l % stride, line));
    let buf_ref: &[T] = &buf;
    for_each_chunk_mut(data, stride, |c, chunk| {
        let (o, i) = (c / n, c % n);
        for (inn, v) in chunk.iter_mut().enumerate() {
            *v = buf_ref[(o * stride + inn) * n + i];
        }
    });
    out
}
