//! Chunked data-parallel helpers.
//!
//! With the `parallel` feature the chunks are distributed over the rayon pool,
//! otherwise they run in order on the calling thread. Every chunk computes its
//! outputs independently, so results do not depend on the chunk size or on
//! scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Largest number of outputs handed to one task.
pub const GRAIN: usize = 1 << 14;

/// Fills `out` chunk by chunk. `f` receives the offset of the chunk's first
/// element and the mutable chunk, which never exceeds `chunk` (nor [`GRAIN`])
/// elements.
pub fn fill_chunked<F>(out: &mut [f64], chunk: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Send + Sync,
{
    let chunk = chunk.clamp(1, GRAIN);
    #[cfg(feature = "parallel")]
    out.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i * chunk, c));
    #[cfg(not(feature = "parallel"))]
    out.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i * chunk, c));
}

/// Evaluates `f(0..n)` and collects the results in index order.
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
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

/// True when the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
