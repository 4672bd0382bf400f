//! Seeded Monte Carlo over the coin-flip model.
//!
//! Trial `index` under `seed` draws its flips from a ChaCha8 stream keyed by
//! `(seed, index)`, so any trial can be regenerated on its own and trials
//! can run in any order or on any thread. Accumulators hold exact integer
//! sums; merging partial accumulators gives bit-identical statistics no
//! matter how the trials were split.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::model::{partition_from_flips, CoinSequence, Flip, Partition};
use crate::moments::{size_distribution, variance_size};
use crate::rational::{ceil_sqrt, Deviation, ExactRational};
use crate::{Error, Result};

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// The `m` flips of trial `index`; bit `i` of each 64-bit word is a head when set.
pub fn sample_flips(m: usize, seed: u64, index: u64) -> CoinSequence {
    let mut rng = stream(seed, index);
    let mut flips = Vec::with_capacity(m);
    while flips.len() < m {
        let word = rng.next_u64();
        let take = (m - flips.len()).min(64);
        flips.extend((0..take).map(|i| if word >> i & 1 == 1 { Flip::Head } else { Flip::Tail }));
    }
    CoinSequence::new(flips)
}

pub fn sample_partition(m: usize, seed: u64, index: u64) -> Partition {
    partition_from_flips(&sample_flips(m, seed, index))
}

/// Size `N` of trial `index`, equal to `sample_partition(m, seed, index).size()`.
pub fn sample_size(m: usize, seed: u64, index: u64) -> u64 {
    let mut rng = stream(seed, index);
    let mut heads = 0u64;
    let mut size = 0u64;
    let mut left = m;
    while left > 0 {
        let word = rng.next_u64();
        let take = left.min(64);
        for i in 0..take {
            if word >> i & 1 == 1 {
                heads += 1;
            } else {
                size += heads + 1;
            }
        }
        left -= take;
    }
    size
}

/// Integer cut-offs for one `d`, on the scale `D = |8N - m(m+3)|`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct TailThreshold {
    d: Deviation,
    /// `|N - E N| >= d m^{3/2} / 4` iff `D >= relaxed`.
    relaxed: u64,
    /// `|N - E N| >= d sqrt(Var N)` iff `D >= exact_sd`.
    exact_sd: u64,
}

impl TailThreshold {
    fn new(m: u64, d: &Deviation) -> Self {
        let m_big = BigRational::from_integer(BigInt::from(m));
        let m_cubed = &m_big * &m_big * &m_big;
        let d2 = d.square();
        // (D/8)^2 >= d^2 m^3 / 16  <=>  D^2 >= 4 d^2 m^3.
        let relaxed = ceil_sqrt_u64(&(d2 * m_cubed * BigInt::from(4)));
        let exact_sd = ceil_sqrt_u64(&(d2 * variance_size(m) * BigInt::from(64)));
        TailThreshold {
            d: d.clone(),
            relaxed,
            exact_sd,
        }
    }
}

fn ceil_sqrt_u64(q: &ExactRational) -> u64 {
    ceil_sqrt(q).to_u64().expect("threshold fits in u64")
}

fn scaled_deviation(m: u64, size: u64) -> u64 {
    (8 * size).abs_diff(m * (m + 3))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailEstimate {
    pub d: Deviation,
    /// Trials with `|N - m(m+3)/8| >= d m^{3/2} / 4`.
    pub relaxed_hits: u64,
    /// Trials with `|N - m(m+3)/8| >= d sqrt(Var N)`.
    pub exact_sd_hits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleStats {
    pub m: u64,
    pub seed: u64,
    pub trials: u64,
    pub sum_n: u128,
    pub sum_n_sq: u128,
    pub mean_n: f64,
    /// Unbiased (`trials - 1`) estimator.
    pub var_n: f64,
    pub se_mean: f64,
    pub tails: Vec<TailEstimate>,
}

impl SampleStats {
    pub fn relaxed_fraction(&self, i: usize) -> f64 {
        self.tails[i].relaxed_hits as f64 / self.trials as f64
    }

    pub fn exact_sd_fraction(&self, i: usize) -> f64 {
        self.tails[i].exact_sd_hits as f64 / self.trials as f64
    }
}

/// Exact running sums for a batch of trials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialAccumulator {
    m: u64,
    seed: u64,
    trials: u64,
    sum_n: u128,
    sum_n_sq: u128,
    thresholds: Vec<TailThreshold>,
    hits: Vec<(u64, u64)>,
}

impl TrialAccumulator {
    pub fn new(m: usize, seed: u64, deviations: &[Deviation]) -> Self {
        let m = m as u64;
        TrialAccumulator {
            m,
            seed,
            trials: 0,
            sum_n: 0,
            sum_n_sq: 0,
            thresholds: deviations.iter().map(|d| TailThreshold::new(m, d)).collect(),
            hits: alloc::vec![(0, 0); deviations.len()],
        }
    }

    pub fn add_size(&mut self, size: u64) {
        self.trials += 1;
        self.sum_n += size as u128;
        self.sum_n_sq += size as u128 * size as u128;
        let dev = scaled_deviation(self.m, size);
        for (th, hits) in self.thresholds.iter().zip(&mut self.hits) {
            hits.0 += (dev >= th.relaxed) as u64;
            hits.1 += (dev >= th.exact_sd) as u64;
        }
    }

    /// Runs trials `indices` and adds them.
    pub fn run(&mut self, indices: core::ops::Range<u64>) {
        for index in indices {
            self.add_size(sample_size(self.m as usize, self.seed, index));
        }
    }

    pub fn merge(&mut self, other: &TrialAccumulator) {
        assert_eq!((self.m, self.seed), (other.m, other.seed), "merging different runs");
        assert_eq!(self.thresholds, other.thresholds, "merging different deviation lists");
        self.trials += other.trials;
        self.sum_n += other.sum_n;
        self.sum_n_sq += other.sum_n_sq;
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            a.0 += b.0;
            a.1 += b.1;
        }
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn finish(&self) -> Result<SampleStats> {
        if self.trials < 2 {
            return Err(Error::Domain("sample statistics need at least 2 trials".into()));
        }
        let t = BigInt::from(self.trials);
        let s1 = BigInt::from(self.sum_n);
        let s2 = BigInt::from(self.sum_n_sq);
        let mean = BigRational::new(s1.clone(), t.clone());
        let var = BigRational::new(&t * s2 - &s1 * &s1, &t * (&t - 1));
        let se2 = &var / BigRational::from_integer(t);
        let var_n = var.to_f64().unwrap_or(f64::NAN);
        Ok(SampleStats {
            m: self.m,
            seed: self.seed,
            trials: self.trials,
            sum_n: self.sum_n,
            sum_n_sq: self.sum_n_sq,
            mean_n: mean.to_f64().unwrap_or(f64::NAN),
            var_n,
            se_mean: libm::sqrt(se2.to_f64().unwrap_or(f64::NAN)),
            tails: self
                .thresholds
                .iter()
                .zip(&self.hits)
                .map(|(th, &(relaxed_hits, exact_sd_hits))| TailEstimate {
                    d: th.d.clone(),
                    relaxed_hits,
                    exact_sd_hits,
                })
                .collect(),
        })
    }
}

/// Mean, unbiased variance and tail counts of `N` over trials `0..trials`.
pub fn empirical_moments(
    m: usize,
    trials: u64,
    seed: u64,
    deviations: &[Deviation],
) -> Result<SampleStats> {
    if trials < 2 {
        return Err(Error::Domain("sample statistics need at least 2 trials".into()));
    }
    let mut acc = TrialAccumulator::new(m, seed, deviations);
    acc.run(0..trials);
    acc.finish()
}

/// Exact fraction of `{H, T}^m` with `|N - m(m+3)/8| >= d m^{3/2} / 4`.
pub fn chebyshev_tail_exact(m: usize, d: &Deviation, cap: usize) -> Result<ExactRational> {
    let counts = size_distribution(m, cap)?;
    let th = TailThreshold::new(m as u64, d);
    let hits: u64 = counts
        .iter()
        .enumerate()
        .filter(|&(n, _)| scaled_deviation(m as u64, n as u64) >= th.relaxed)
        .map(|(_, &c)| c)
        .sum();
    Ok(BigRational::new(
        BigInt::from(hits),
        BigInt::from(BigUint::from(1u8) << m),
    ))
}

/// Monte Carlo estimate of the same tail fraction over trials `0..trials`.
pub fn chebyshev_tail_sampled(m: usize, d: &Deviation, trials: u64, seed: u64) -> Result<f64> {
    let stats = empirical_moments(m, trials, seed, core::slice::from_ref(d))?;
    Ok(stats.relaxed_fraction(0))
}
