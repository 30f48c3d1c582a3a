//! Ordered map over sweep points.
//!
//! With the `parallel` feature points are dispatched to a rayon pool;
//! without it, or with one worker, they run in order on the calling thread.
//! Results always come back in input order.

#[cfg(feature = "parallel")]
use crate::error::Error;
use crate::error::Result;

/// Worker count requested by the caller; `None` means all available cores.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Workers(pub Option<usize>);

impl Workers {
    pub fn sequential() -> Self {
        Workers(Some(1))
    }

    pub fn resolved(self) -> usize {
        match self.0 {
            Some(n) => n.max(1),
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_ordered<T, R, F>(items: &[T], workers: Workers, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    let n = workers.resolved();
    if n == 1 || items.len() < 2 {
        return Ok(map_sequential(items, f));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::Decomposition(format!("worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

#[cfg(not(feature = "parallel"))]
pub fn map_ordered<T, R, F>(items: &[T], _workers: Workers, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    Ok(map_sequential(items, f))
}

/// Like [`map_ordered`] for fallible work; the first error in input order
/// wins, so the reported failure does not depend on scheduling.
pub fn try_map_ordered<T, R, F>(items: &[T], workers: Workers, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    map_ordered(items, workers, f)?.into_iter().collect()
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|i| if i == count - 1 { stop } else { start + step * i as f64 })
                .collect()
        }
    }
}
