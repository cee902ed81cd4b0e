//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature (default) items are evaluated on a rayon pool;
//! without it every [`Execution`] runs serially. Results always come back in
//! input order, so output never depends on the schedule.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    /// `workers == 0` uses rayon's global pool.
    #[default]
    Parallel,
    Workers(usize),
}

impl Execution {
    pub fn from_workers(workers: usize) -> Self {
        match workers {
            0 => Execution::Parallel,
            1 => Execution::Serial,
            n => Execution::Workers(n),
        }
    }
}

#[cfg(feature = "parallel")]
pub fn map_ordered<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    match exec {
        Execution::Serial => items.iter().map(f).collect(),
        Execution::Parallel => items.par_iter().map(f).collect(),
        Execution::Workers(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(_) => items.par_iter().map(f).collect(),
        },
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_ordered<T, R, F>(items: &[T], _exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}
