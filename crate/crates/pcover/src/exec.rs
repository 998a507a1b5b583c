//! Sequential/parallel dispatch for the data-parallel sweeps.
//!
//! Hot loops (exhaustive W sweeps, Monte Carlo batches, tuple enumeration)
//! run through these helpers so the same build can execute either lane: the
//! `parallel` feature enables rayon, `ExecPolicy::Sequential` forces the
//! fallback, and benches compare the two. Results are schedule-independent:
//! work is mapped over fixed-index items and folded in item order, so even
//! float accumulations are bit-reproducible.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecPolicy {
    Sequential,
    /// Rayon work-stealing when the `parallel` feature is on; otherwise
    /// silently degrades to sequential.
    Parallel,
}

impl Default for ExecPolicy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecPolicy::Parallel
        } else {
            ExecPolicy::Sequential
        }
    }
}

/// Maps `f` over `0..count` and folds the results in index order.
///
/// The fold runs over a fully materialized, index-ordered buffer, so the
/// outcome is identical for both policies even when `fold` is not
/// associative (float sums).
pub fn map_fold_indexed<T, A, F, G>(policy: ExecPolicy, count: usize, f: F, init: A, fold: G) -> A
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
    A: Send,
    G: Fn(A, T) -> A,
{
    let items = map_indexed(policy, count, f);
    items.into_iter().fold(init, fold)
}

/// Maps `f` over `0..count`, returning results in index order.
pub fn map_indexed<T, F>(policy: ExecPolicy, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if policy == ExecPolicy::Parallel {
            use rayon::prelude::*;
            return (0..count).into_par_iter().map(f).collect();
        }
    }
    let _ = policy;
    (0..count).map(f).collect()
}

/// Maps `f` over the items of a slice, returning results in slice order.
pub fn map_slice<'a, S, T, F>(policy: ExecPolicy, items: &'a [S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&'a S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if policy == ExecPolicy::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = policy;
    items.iter().map(f).collect()
}

/// Thread cap from `PCOVER_THREADS`; `None` means library default.
pub fn thread_cap_from_env() -> Option<usize> {
    std::env::var("PCOVER_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t >= 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree_exactly_on_float_sums() {
        let f = |i: usize| ((i as f64) * 0.1).sin();
        let seq = map_fold_indexed(ExecPolicy::Sequential, 10_000, f, 0.0f64, |a, x| a + x);
        let par = map_fold_indexed(ExecPolicy::Parallel, 10_000, f, 0.0f64, |a, x| a + x);
        assert_eq!(seq.to_bits(), par.to_bits());
    }

    #[test]
    fn map_preserves_index_order() {
        let out = map_indexed(ExecPolicy::Parallel, 100, |i| i * i);
        assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }
}
