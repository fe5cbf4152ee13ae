//! Deterministic parallel reductions over sample indices.
//!
//! Indices are cut into fixed blocks of [`BLOCK`] samples. Each block is summed
//! sequentially, possibly on a worker thread, and the block partials are then added
//! in block order on the calling thread. The result is therefore bit-identical for
//! any thread count. The worker count is capped by `RELU_REGRESS_THREADS`.

use rayon::prelude::*;
use std::ops::Range;
use std::sync::OnceLock;

pub const BLOCK: usize = 2048;

pub const THREADS_ENV: &str = "RELU_REGRESS_THREADS";

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("failed to build reduction thread pool")
    })
}

fn blocks(n: usize) -> impl IndexedParallelIterator<Item = Range<usize>> {
    let nblocks = n.div_ceil(BLOCK);
    (0..nblocks)
        .into_par_iter()
        .map(move |b| b * BLOCK..((b + 1) * BLOCK).min(n))
}

/// `Σ_{i<n} f(i)` with a fixed summation tree.
pub fn sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    if n <= BLOCK {
        return (0..n).map(&f).sum();
    }
    let partials: Vec<f64> =
        pool().install(|| blocks(n).map(|r| r.map(&f).sum::<f64>()).collect());
    partials.into_iter().sum()
}

/// Vector-valued reduction: `f(i, acc)` adds sample `i`'s contribution into `acc`.
pub fn sum_vec<F>(n: usize, dim: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let run_block = |r: Range<usize>| {
        let mut acc = vec![0.0; dim];
        for i in r {
            f(i, &mut acc);
        }
        acc
    };
    if n <= BLOCK {
        return run_block(0..n);
    }
    let partials: Vec<Vec<f64>> = pool().install(|| blocks(n).map(run_block).collect());
    let mut total = vec![0.0; dim];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_sequential_sum() {
        let n = 10 * BLOCK + 17;
        let f = |i: usize| ((i as f64) * 0.37).sin();
        let seq: f64 = (0..n).map(f).sum();
        let par = sum(n, f);
        assert!((seq - par).abs() <= 1e-10 * seq.abs().max(1.0));
        assert_eq!(par.to_bits(), sum(n, f).to_bits());
    }

    #[test]
    fn vector_reduction() {
        let n = 3 * BLOCK + 5;
        let v = sum_vec(n, 2, |i, acc| {
            acc[0] += 1.0;
            acc[1] += i as f64;
        });
        assert_eq!(v[0], n as f64);
        assert_eq!(v[1], (n * (n - 1) / 2) as f64);
    }
}
