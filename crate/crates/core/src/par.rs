//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) `Execution::Parallel` fans work out
//! over rayon's global pool; without it every call runs sequentially. Both
//! paths are observable at runtime so the benches can compare them.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

pub fn map_range<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Index of the first item (in slice order) satisfying `pred`.
pub fn find_first<T, F>(exec: Execution, items: &[T], pred: F) -> Option<usize>
where
    T: Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().position_first(pred);
    }
    let _ = exec;
    items.iter().position(pred)
}

/// True iff `pred` holds for every integer in `lo..=hi`.
pub fn all_in_range<F>(exec: Execution, lo: i64, hi: i64, pred: F) -> bool
where
    F: Fn(i64) -> bool + Sync + Send,
{
    if lo > hi {
        return true;
    }
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && hi - lo > 4096 {
        return (lo..=hi).into_par_iter().all(pred);
    }
    let _ = exec;
    (lo..=hi).all(pred)
}

/// True iff `pred` holds for some integer in `lo..=hi`.
pub fn any_in_range<F>(exec: Execution, lo: i64, hi: i64, pred: F) -> bool
where
    F: Fn(i64) -> bool + Sync + Send,
{
    !all_in_range(exec, lo, hi, |x| !pred(x))
}
