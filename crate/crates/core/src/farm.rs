//! Order-preserving maps over independent jobs.
//!
//! With the `parallel` feature the jobs run on rayon's pool; without it, or
//! through [`map_sequential`], they run in order on the calling thread. Both
//! paths return results in input order, so callers get identical output.

/// Maps `f` over `items` on the current thread.
pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_parallel<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// The default map: parallel when the feature is on.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(items, f)
    }
}

/// Runs `job` with at most `threads` workers (0 keeps the global default).
pub fn with_threads<R: Send>(threads: usize, job: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            return pool.install(job);
        }
    }
    let _ = threads;
    job()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let xs: Vec<u64> = (0..1000).collect();
        let seq = map_sequential(&xs, |x| x * x);
        assert_eq!(map(&xs, |x| x * x), seq);
        assert_eq!(with_threads(3, || map(&xs, |x| x * x)), seq);
    }
}
