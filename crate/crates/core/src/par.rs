//! Replicate-level data parallelism.
//!
//! With the `parallel` feature (default) replicates are evaluated on the rayon
//! pool; without it, or with [`Execution::Sequential`], they run in order on
//! the calling thread. Outputs are always returned in replicate order, and all
//! reductions go through [`tree_sum`], so both paths are bit-identical.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Parallel,
    Sequential,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// `f(0), f(1), ..., f(n - 1)` in index order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n as u64).into_par_iter().map(f).collect(),
        _ => (0..n as u64).map(f).collect(),
    }
}

/// Like [`map_indexed`] but stops at the lowest-index error.
pub fn try_map_indexed<T, E, F>(n: usize, exec: Execution, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    map_indexed(n, exec, f).into_iter().collect()
}

const LEAF: usize = 64;

/// Pairwise summation with a fixed split shape, independent of thread count.
pub fn tree_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        tree_sum(&xs[..mid]) + tree_sum(&xs[mid..])
    }
}

/// Mean through [`tree_sum`]; `NaN` for an empty slice.
pub fn tree_mean(xs: &[f64]) -> f64 {
    tree_sum(xs) / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_agree() {
        let f = |i: u64| (i as f64).sqrt().sin();
        let a = map_indexed(1000, Execution::Sequential, f);
        let b = map_indexed(1000, Execution::Parallel, f);
        assert_eq!(a, b);
        assert_eq!(tree_sum(&a).to_bits(), tree_sum(&b).to_bits());
    }

    #[test]
    fn try_map_reports_first_error() {
        let r: Result<Vec<u64>, u64> =
            try_map_indexed(100, Execution::default(), |i| if i % 7 == 3 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(3));
    }

    #[test]
    fn tree_sum_matches_naive() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(tree_sum(&xs), 500_500.0);
    }
}
