//! Execution-mode switch for the data-parallel kernels.
//!
//! With the `parallel` feature, [`Parallelism::Rayon`] dispatches independent
//! work items (blocks, cliques, rows) to the rayon pool. Without it, or with
//! [`Parallelism::Sequential`], everything runs in order on the caller's
//! thread. Results are identical in both modes: every kernel writes to its
//! own slot and reductions happen afterwards in index order.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Rayon,
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Rayon
        } else {
            Parallelism::Sequential
        }
    }
}

impl Parallelism {
    /// True when work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Rayon
    }
}

/// `(0..len).map(f)` collected in index order.
pub fn map_range<T, F>(mode: Parallelism, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() && len > 1 {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..len).map(f).collect()
}

/// Applies `f` to every element with its index.
pub fn for_each_mut<T, F>(mode: Parallelism, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() && items.len() > 1 {
        use rayon::prelude::*;
        items.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
        return;
    }
    let _ = mode;
    items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

/// Fills `out[i] = f(i)` for chunks of rows; chunking keeps the per-task
/// overhead small for cheap row kernels.
pub fn fill_chunks<F>(mode: Parallelism, out: &mut [f64], chunk: usize, f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() && out.len() > chunk {
        use rayon::prelude::*;
        out.par_chunks_mut(chunk).enumerate().for_each(|(c, sl)| {
            let base = c * chunk;
            for (i, v) in sl.iter_mut().enumerate() {
                *v = f(base + i);
            }
        });
        return;
    }
    let _ = (mode, chunk);
    for (i, v) in out.iter_mut().enumerate() {
        *v = f(i);
    }
}
