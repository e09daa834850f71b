//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper preserves input order in its output so that reductions done
//! afterwards are bit-for-bit reproducible regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Maps `f` over a slice, collecting results in order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Maximum of `f` over `0..n` (NaN-propagating, 0 for empty input).
pub fn max_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_range(n, f).into_iter().fold(0.0, nan_max)
}

/// `f64::max` that keeps NaN instead of discarding it, so a broken residual
/// can never masquerade as a pass.
pub fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Runs `f` on a single-thread pool. Used by benches to compare against the
/// default pool; without the `parallel` feature it just calls `f`.
pub fn sequentially<R, F>(f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool")
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        f()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_range_keeps_order() {
        let v = map_range(1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }

    #[test]
    fn nan_is_sticky() {
        assert!(max_range(4, |i| if i == 2 { f64::NAN } else { 1.0 }).is_nan());
        assert_eq!(max_range(0, |_| 1.0), 0.0);
    }

    #[test]
    fn sequential_pool_matches() {
        let a: f64 = map_range(100, |i| (i as f64).sqrt()).iter().sum();
        let b: f64 = sequentially(|| map_range(100, |i| (i as f64).sqrt()).iter().sum());
        assert_eq!(a, b);
    }
}
