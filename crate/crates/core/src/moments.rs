//! Exact moments of the coin-flip process.
//!
//! Closed forms are exact rationals. [`EnumerationSums`] walks every
//! outcome of `{H, T}^m`, accumulating integer power sums, and turns them
//! into exact expectations, variances and covariances. No floating point is
//! used anywhere in this module.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::rational::{ratio, ExactRational};
use crate::{Error, Result};

/// Default cap on `m` for exhaustive enumeration (`2^20` outcomes).
pub const ENUMERATION_CAP: usize = 20;

fn q(v: u64) -> ExactRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `E[N] = m(m+3)/8`.
pub fn expected_size(m: u64) -> ExactRational {
    q(m) * q(m + 3) / q(8)
}

/// `Var N = m^3/48 + m^2/32 + 19m/96`.
pub fn variance_size(m: u64) -> ExactRational {
    let m = q(m);
    &m * &m * &m / q(48) + &m * &m / q(32) + m * q(19) / q(96)
}

/// `m^3/16`, an upper bound for `Var N` once `m >= 3`.
pub fn variance_crude_bound(m: u64) -> Result<ExactRational> {
    if m < 3 {
        return Err(Error::Domain(alloc::format!(
            "the bound Var N <= m^3/16 needs m >= 3, got m = {m}"
        )));
    }
    Ok(q(m) * q(m) * q(m) / q(16))
}

/// `(E[X_t], Var X_t) = (t/2, t/4)` for `X_t ~ Bin(t, 1/2)`.
pub fn binomial_moments(t: u64) -> (ExactRational, ExactRational) {
    (q(t) / q(2), q(t) / q(4))
}

/// `(E[C_t], Var C_t) = ((t-1)/4, (t^2-1)/16)`.
pub fn contribution_moments(t: u64) -> Result<(ExactRational, ExactRational)> {
    if t == 0 {
        return Err(Error::Domain("flip indices start at t = 1".into()));
    }
    Ok((q(t - 1) / q(4), (q(t) * q(t) - q(1)) / q(16)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeMoments {
    pub t: u64,
    pub mean_c: ExactRational,
    pub var_c: ExactRational,
    pub mean_x: ExactRational,
    pub var_x: ExactRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentSummary {
    pub m: u64,
    pub mean_n: ExactRational,
    pub var_n: ExactRational,
    pub mean_y: ExactRational,
    pub var_y: ExactRational,
    /// Entries for `t = 1..=m`.
    pub per_t: Vec<TimeMoments>,
}

impl MomentSummary {
    /// All fields from the closed forms.
    pub fn closed_form(m: u64) -> Self {
        let per_t = (1..=m)
            .map(|t| {
                let (mean_c, var_c) = contribution_moments(t).expect("t >= 1");
                let (mean_x, var_x) = binomial_moments(t);
                TimeMoments {
                    t,
                    mean_c,
                    var_c,
                    mean_x,
                    var_x,
                }
            })
            .collect();
        MomentSummary {
            m,
            mean_n: expected_size(m),
            var_n: variance_size(m),
            mean_y: q(m) / q(2),
            var_y: q(m) / q(4),
            per_t,
        }
    }

    /// `E[N] - E[Y] - sum E[C_t]`; zero by linearity.
    pub fn linearity_defect(&self) -> ExactRational {
        self.per_t
            .iter()
            .fold(&self.mean_n - &self.mean_y, |acc, row| acc - &row.mean_c)
    }

    /// `Var N - Var Y - sum Var C_t`; zero when all pairwise covariances vanish.
    pub fn additivity_defect(&self) -> ExactRational {
        self.per_t
            .iter()
            .fold(&self.var_n - &self.var_y, |acc, row| acc - &row.var_c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CovarianceKind {
    /// `Cov(C_t, X_u)` with `t <= u`.
    ContributionHeads,
    /// `Cov(C_t, C_u)` with `t < u`.
    ContributionPair,
    /// `Cov(C_t, Y)`.
    ContributionTails,
}

impl CovarianceKind {
    pub fn label(self) -> &'static str {
        match self {
            CovarianceKind::ContributionHeads => "Cov(C_t,X_u)",
            CovarianceKind::ContributionPair => "Cov(C_t,C_u)",
            CovarianceKind::ContributionTails => "Cov(C_t,Y)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CovarianceEntry {
    pub kind: CovarianceKind,
    pub t: u64,
    /// `None` for [`CovarianceKind::ContributionTails`].
    pub u: Option<u64>,
    pub covariance: ExactRational,
}

/// Integer power sums over a set of outcomes of `{H, T}^m`.
///
/// Outcomes are indexed by `u64` bit patterns (bit `t - 1` set = head).
/// Sums over disjoint index ranges [`merge`](Self::merge) into exactly the
/// sums over their union, so the outcome space can be split freely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationSums {
    m: usize,
    count: u128,
    n: u128,
    nn: u128,
    y: u128,
    yy: u128,
    c: Vec<u128>,
    cc: Vec<u128>,
    x: Vec<u128>,
    xx: Vec<u128>,
    cy: Vec<u128>,
    /// `sum C_t X_u` at `(t-1) * m + (u-1)`, filled for `t <= u`.
    cx: Vec<u128>,
    /// `sum C_t C_u` at `(t-1) * m + (u-1)`, filled for `t < u`.
    c_pair: Vec<u128>,
}

impl EnumerationSums {
    pub fn new(m: usize) -> Self {
        assert!(m < 64, "enumeration indexes outcomes with u64");
        EnumerationSums {
            m,
            count: 0,
            n: 0,
            nn: 0,
            y: 0,
            yy: 0,
            c: vec![0; m],
            cc: vec![0; m],
            x: vec![0; m],
            xx: vec![0; m],
            cy: vec![0; m],
            cx: vec![0; m * m],
            c_pair: vec![0; m * m],
        }
    }

    pub fn outcomes(m: usize) -> u64 {
        1u64 << m
    }

    /// Sums over outcomes `range` (a sub-range of `0..2^m`).
    pub fn over_range(m: usize, range: Range<u64>) -> Self {
        let mut sums = EnumerationSums::new(m);
        let mut c = vec![0u128; m];
        let mut x = vec![0u128; m];
        for bits in range {
            sums.add_outcome(bits, &mut c, &mut x);
        }
        sums
    }

    fn add_outcome(&mut self, bits: u64, c: &mut [u128], x: &mut [u128]) {
        let m = self.m;
        let mut heads = 0u128;
        let mut tails = 0u128;
        let mut size = 0u128;
        for i in 0..m {
            if bits >> i & 1 == 1 {
                c[i] = 0;
                heads += 1;
            } else {
                c[i] = heads;
                size += heads + 1;
                tails += 1;
            }
            x[i] = heads;
        }
        self.count += 1;
        self.n += size;
        self.nn += size * size;
        self.y += tails;
        self.yy += tails * tails;
        for t in 0..m {
            self.c[t] += c[t];
            self.cc[t] += c[t] * c[t];
            self.x[t] += x[t];
            self.xx[t] += x[t] * x[t];
            self.cy[t] += c[t] * tails;
            if c[t] == 0 {
                continue;
            }
            let row = t * m;
            for (u, xu) in x.iter().enumerate().skip(t) {
                self.cx[row + u] += c[t] * xu;
            }
            for u in t + 1..m {
                self.c_pair[row + u] += c[t] * c[u];
            }
        }
    }

    pub fn merge(&mut self, other: &EnumerationSums) {
        assert_eq!(self.m, other.m, "merging sums for different m");
        self.count += other.count;
        self.n += other.n;
        self.nn += other.nn;
        self.y += other.y;
        self.yy += other.yy;
        for (a, b) in [
            (&mut self.c, &other.c),
            (&mut self.cc, &other.cc),
            (&mut self.x, &other.x),
            (&mut self.xx, &other.xx),
            (&mut self.cy, &other.cy),
            (&mut self.cx, &other.cx),
            (&mut self.c_pair, &other.c_pair),
        ] {
            a.iter_mut().zip(b).for_each(|(a, b)| *a += b);
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_complete(&self) -> bool {
        self.count == 1u128 << self.m
    }

    fn mean(&self, sum: u128) -> ExactRational {
        BigRational::new(BigInt::from(sum), BigInt::from(self.count))
    }

    /// `E[AB] - E[A] E[B]` from the three sums.
    fn cov(&self, ab: u128, a: u128, b: u128) -> ExactRational {
        let count = BigInt::from(self.count);
        let num = BigInt::from(ab) * &count - BigInt::from(a) * BigInt::from(b);
        BigRational::new(num, &count * &count)
    }

    /// Panics unless every outcome has been added.
    pub fn summary(&self) -> MomentSummary {
        assert!(self.is_complete(), "summary needs all 2^m outcomes");
        let per_t = (0..self.m)
            .map(|i| TimeMoments {
                t: i as u64 + 1,
                mean_c: self.mean(self.c[i]),
                var_c: self.cov(self.cc[i], self.c[i], self.c[i]),
                mean_x: self.mean(self.x[i]),
                var_x: self.cov(self.xx[i], self.x[i], self.x[i]),
            })
            .collect();
        MomentSummary {
            m: self.m as u64,
            mean_n: self.mean(self.n),
            var_n: self.cov(self.nn, self.n, self.n),
            mean_y: self.mean(self.y),
            var_y: self.cov(self.yy, self.y, self.y),
            per_t,
        }
    }

    /// Every covariance that should vanish, in a fixed order:
    /// `Cov(C_t, X_u)` for `t <= u`, then `Cov(C_t, C_u)` for `t < u`, then
    /// `Cov(C_t, Y)`.
    pub fn covariances(&self) -> Vec<CovarianceEntry> {
        assert!(self.is_complete(), "covariances need all 2^m outcomes");
        let m = self.m;
        let mut out = Vec::new();
        for t in 0..m {
            for u in t..m {
                out.push(CovarianceEntry {
                    kind: CovarianceKind::ContributionHeads,
                    t: t as u64 + 1,
                    u: Some(u as u64 + 1),
                    covariance: self.cov(self.cx[t * m + u], self.c[t], self.x[u]),
                });
            }
        }
        for t in 0..m {
            for u in t + 1..m {
                out.push(CovarianceEntry {
                    kind: CovarianceKind::ContributionPair,
                    t: t as u64 + 1,
                    u: Some(u as u64 + 1),
                    covariance: self.cov(self.c_pair[t * m + u], self.c[t], self.c[u]),
                });
            }
        }
        for t in 0..m {
            out.push(CovarianceEntry {
                kind: CovarianceKind::ContributionTails,
                t: t as u64 + 1,
                u: None,
                covariance: self.cov(self.cy[t], self.c[t], self.y),
            });
        }
        out
    }
}

fn check_cap(m: usize, cap: usize) -> Result<()> {
    if m > cap || m >= 64 {
        return Err(Error::CapExceeded {
            what: "m",
            requested: m as u64,
            cap: cap.min(63) as u64,
        });
    }
    Ok(())
}

/// Exact moments by summing over all `2^m` outcomes.
pub fn enumerate_moments(m: usize, cap: usize) -> Result<MomentSummary> {
    check_cap(m, cap)?;
    Ok(EnumerationSums::over_range(m, 0..EnumerationSums::outcomes(m)).summary())
}

/// Exact covariances by summing over all `2^m` outcomes.
pub fn covariance_report(m: usize, cap: usize) -> Result<Vec<CovarianceEntry>> {
    check_cap(m, cap)?;
    Ok(EnumerationSums::over_range(m, 0..EnumerationSums::outcomes(m)).covariances())
}

/// `counts[k]` is the number of outcomes with `N = k`.
pub fn size_distribution(m: usize, cap: usize) -> Result<Vec<u64>> {
    check_cap(m, cap)?;
    let max_size = (m / 2 + 1) * (m - m / 2);
    let mut counts = vec![0u64; max_size + 1];
    for bits in 0..EnumerationSums::outcomes(m) {
        counts[crate::model::size_from_bits(bits, m) as usize] += 1;
    }
    while counts.len() > 1 && counts.last() == Some(&0) {
        counts.pop();
    }
    Ok(counts)
}

/// Flips `t < u` and the two probabilities showing `C_t` and `C_u` are
/// dependent even though they are uncorrelated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependenceWitness {
    pub t: u64,
    pub u: u64,
    /// `P[C_u = 0 | C_t >= 1]`.
    pub conditional: ExactRational,
    /// `P[C_u = 0]`.
    pub marginal: ExactRational,
}

/// First pair `t < u` (lexicographic) with `P[C_u = 0 | C_t >= 1] != P[C_u = 0]`.
pub fn dependence_witness(m: usize, cap: usize) -> Result<Option<DependenceWitness>> {
    check_cap(m, cap)?;
    let outcomes = EnumerationSums::outcomes(m);
    let contribution = |bits: u64, t: usize| -> u64 {
        if bits >> (t - 1) & 1 == 1 {
            0
        } else {
            (bits & ((1u64 << (t - 1)) - 1)).count_ones() as u64
        }
    };
    for t in 1..=m {
        for u in t + 1..=m {
            let (mut given, mut both, mut zero_u) = (0i64, 0i64, 0i64);
            for bits in 0..outcomes {
                let cu_zero = contribution(bits, u) == 0;
                if cu_zero {
                    zero_u += 1;
                }
                if contribution(bits, t) >= 1 {
                    given += 1;
                    if cu_zero {
                        both += 1;
                    }
                }
            }
            if given == 0 {
                continue;
            }
            let conditional = ratio(both, given);
            let marginal = ratio(zero_u, outcomes as i64);
            if conditional != marginal {
                return Ok(Some(DependenceWitness {
                    t: t as u64,
                    u: u as u64,
                    conditional,
                    marginal,
                }));
            }
        }
    }
    Ok(None)
}

/// `true` when every entry of a covariance report is exactly zero.
pub fn all_uncorrelated(report: &[CovarianceEntry]) -> bool {
    report.iter().all(|e| e.covariance.is_zero())
}
