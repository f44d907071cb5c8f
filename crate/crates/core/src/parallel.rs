//! Index-ordered parallel map used by every Monte Carlo loop.
//!
//! `parallelism` follows one convention crate-wide: `1` runs on the calling
//! thread, `0` uses the ambient rayon pool and `k > 1` runs on a dedicated
//! pool of `k` threads. Output order always follows the index, never the
//! schedule.

pub fn map_indexed<T, F>(count: usize, parallelism: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match parallelism {
            1 => {}
            0 => return (0..count).into_par_iter().map(&f).collect(),
            k => {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(k).build() {
                    return pool.install(|| (0..count).into_par_iter().map(&f).collect());
                }
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallelism;
    (0..count).map(f).collect()
}

/// Runs `f` inside a pool of `threads` workers (ambient pool when 0).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            return pool.install(f);
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    f()
}
