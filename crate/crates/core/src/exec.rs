//! Execution helpers: seeded determinism and data-parallel sample checking.
//!
//! Sample verification is embarrassingly parallel: inputs are generated
//! sequentially from the seeded generator, checked in parallel, and reduced
//! in input order, so a run's report bytes depend only on the seed. With the
//! `parallel` feature disabled everything runs sequentially on one thread.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Configures the global worker pool; `jobs = 0` keeps the default. Calling
/// this more than once is harmless (later calls are ignored by the pool).
pub fn configure_jobs(jobs: usize) {
    #[cfg(feature = "parallel")]
    {
        if jobs > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
    }
}

/// Maps `f` over the items, in parallel when the feature allows, preserving
/// input order in the output.
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
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

/// Always-sequential twin of [`map_collect`]; the bench suite compares the
/// two on identical workloads.
pub fn map_collect_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn parallel_and_sequential_agree_in_order() {
        let items: Vec<u64> = (0..500).collect();
        let f = |x: &u64| x.wrapping_mul(2654435761) >> 7;
        assert_eq!(map_collect(&items, f), map_collect_seq(&items, f));
    }

    #[test]
    fn seeded_rng_is_reproducible() {
        let mut a = seeded_rng(42);
        let mut b = seeded_rng(42);
        let xs: Vec<u32> = (0..16).map(|_| a.random()).collect();
        let ys: Vec<u32> = (0..16).map(|_| b.random()).collect();
        assert_eq!(xs, ys);
    }
}
