//! Data-parallel helpers.
//!
//! With the `parallel` feature the indexed map runs on the rayon pool;
//! without it the same call is a plain sequential loop. Results are
//! identical either way because all randomness is keyed, never stateful.
//! [`map_indexed_seq`] is always available as the reference path.

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Sizes the global worker pool. Affects speed only, never results;
/// returns false when the pool was already built or the `parallel`
/// feature is off.
#[cfg(feature = "parallel")]
pub fn set_threads(n: usize) -> bool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .is_ok()
}

#[cfg(not(feature = "parallel"))]
pub fn set_threads(_n: usize) -> bool {
    false
}
