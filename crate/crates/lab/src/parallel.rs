//! Rayon drivers for the core computations.
//!
//! Every reduction here is either exact (integer sums) or collects results
//! in index order, so output does not depend on the thread count.

use std::ops::Range;

use partlab_core::bounds::{BoundChecker, BoundVerdict};
use partlab_core::moments::EnumerationSums;
use partlab_core::rational::Deviation;
use partlab_core::sampler::{SampleStats, TrialAccumulator};
use partlab_core::Result;
use rayon::prelude::*;

const ENUMERATION_CHUNK: u64 = 1 << 12;
const SAMPLE_CHUNK: u64 = 1 << 12;

fn chunks(total: u64, size: u64) -> Vec<Range<u64>> {
    (0..total.div_ceil(size))
        .map(|i| i * size..((i + 1) * size).min(total))
        .collect()
}

/// Power sums over all of `{H, T}^m`.
pub fn enumeration_sums(m: usize) -> EnumerationSums {
    chunks(EnumerationSums::outcomes(m), ENUMERATION_CHUNK)
        .into_par_iter()
        .map(|r| EnumerationSums::over_range(m, r))
        .reduce(
            || EnumerationSums::new(m),
            |mut a, b| {
                a.merge(&b);
                a
            },
        )
}

/// Same result as [`partlab_core::sampler::empirical_moments`].
pub fn sample_stats(m: usize, trials: u64, seed: u64, deviations: &[Deviation]) -> Result<SampleStats> {
    chunks(trials, SAMPLE_CHUNK)
        .into_par_iter()
        .map(|r| {
            let mut acc = TrialAccumulator::new(m, seed, deviations);
            acc.run(r);
            acc
        })
        .reduce(
            || TrialAccumulator::new(m, seed, deviations),
            |mut a, b| {
                a.merge(&b);
                a
            },
        )
        .finish()
}

/// `check(k)` for each `k` in `lo..=hi`, in order.
pub fn sweep<F>(lo: u64, hi: u64, check: F) -> Result<Vec<BoundVerdict>>
where
    F: Fn(u64) -> Result<BoundVerdict> + Sync + Send,
{
    (lo..=hi).into_par_iter().map(check).collect()
}

/// Parallel form of [`BoundChecker::explicit_sweep`].
pub fn explicit_sweep(checker: &BoundChecker<'_>, lo: u64, hi: u64) -> Result<Vec<BoundVerdict>> {
    sweep(lo, hi, |n| checker.explicit(n))
}
