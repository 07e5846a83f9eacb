//! Order-preserving map that fans out over rayon when the `parallel` feature
//! is on and the caller asks for it, and runs sequentially otherwise.

/// Whether this build can run anything in parallel.
pub const AVAILABLE: bool = cfg!(feature = "parallel");

pub fn map<T, R, F>(parallel: bool, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel && items.len() > 1 {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// `map` over fallible work, stopping at the first error in input order.
pub fn try_map<T, R, E, F>(parallel: bool, items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    map(parallel, items, f).into_iter().collect()
}
