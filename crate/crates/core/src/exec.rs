//! Batch execution of independent jobs.
//!
//! With the `parallel` feature (default) batches run on rayon; without it they
//! run in order on the calling thread. Results always come back in job order,
//! so output never depends on scheduling.

/// Environment variable capping the worker count of parallel batches.
pub const THREADS_ENV: &str = "PEERFLOW_THREADS";

pub fn run_batch<T, R, F>(jobs: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        run_batch_parallel(jobs, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_batch_sequential(jobs, f)
    }
}

pub fn run_batch_sequential<T, R, F>(jobs: Vec<T>, f: F) -> Vec<R>
where
    F: Fn(T) -> R,
{
    jobs.into_iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn run_batch_parallel<T, R, F>(jobs: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    let work = move || jobs.into_par_iter().map(&f).collect::<Vec<R>>();
    match thread_cap() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        },
        None => work(),
    }
}

/// Positive integer from `PEERFLOW_THREADS`, if set.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}
