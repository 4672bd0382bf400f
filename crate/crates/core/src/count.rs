//! Exact values of the partition function `p(n)`.
//!
//! [`CountTable`] runs Euler's pentagonal-number recurrence; the memoized
//! largest-part recursion in [`count_by_enumeration`] is an independent
//! oracle for it.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::interval::RealContext;
use crate::{Error, Result};

/// Default cap for [`count_by_enumeration`].
pub const ENUMERATION_CAP: u64 = 120;

/// Memory allowed for a table, compared against [`TableBudget::estimate_bytes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableBudget {
    pub max_bytes: u64,
}

impl Default for TableBudget {
    fn default() -> Self {
        TableBudget { max_bytes: 1 << 30 }
    }
}

impl TableBudget {
    pub const UNLIMITED: TableBudget = TableBudget { max_bytes: u64::MAX };

    /// Rough heap use of `p(0..=max_n)`: `log2 p(n) <= 3.71 sqrt(n)` bits of
    /// digits per entry plus a fixed per-entry overhead.
    pub fn estimate_bytes(max_n: usize) -> u64 {
        let n = max_n as f64;
        let digits = 3.71 * (2.0 / 3.0) * n * libm::sqrt(n) / 8.0;
        (digits + 40.0 * (n + 1.0)) as u64
    }

    fn check(&self, max_n: usize) -> Result<()> {
        let needed = Self::estimate_bytes(max_n);
        if needed > self.max_bytes {
            return Err(Error::ResourceLimit {
                max_n,
                needed,
                budget: self.max_bytes,
            });
        }
        Ok(())
    }
}

/// Exact `p(0..=max_n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    values: Vec<BigUint>,
}

/// Generalized pentagonal numbers `k(3k-1)/2, k(3k+1)/2` for `k = 1, 2, ...`
/// up to `limit`, with the sign `(-1)^(k+1)` (`true` = add).
fn pentagonal_offsets(limit: usize) -> Vec<(usize, bool)> {
    let mut out = Vec::new();
    for k in 1.. {
        let g1 = k * (3 * k - 1) / 2;
        if g1 > limit {
            break;
        }
        let add = k % 2 == 1;
        out.push((g1, add));
        let g2 = k * (3 * k + 1) / 2;
        if g2 <= limit {
            out.push((g2, add));
        }
    }
    out
}

fn next_value(values: &[BigUint], n: usize, offsets: &[(usize, bool)]) -> BigUint {
    let mut plus = BigUint::zero();
    let mut minus = BigUint::zero();
    for &(g, add) in offsets.iter().take_while(|(g, _)| *g <= n) {
        let v = &values[n - g];
        if add {
            plus += v;
        } else {
            minus += v;
        }
    }
    plus - minus
}

impl CountTable {
    pub fn build(max_n: usize, budget: TableBudget) -> Result<Self> {
        let mut table = CountTable {
            values: vec![BigUint::one()],
        };
        table.extend_to(max_n, budget)?;
        Ok(table)
    }

    /// Accepts previously computed values (for instance from a cache file)
    /// after checking them against the recurrence.
    pub fn from_values(values: Vec<BigUint>) -> Result<Self> {
        Self::check_recurrence(&values, 1..values.len())?;
        Self::from_checked_values(values)
    }

    /// Checks `values[n]` against the recurrence for each `n` in `range`.
    /// Each check reads only earlier entries, so disjoint ranges can be
    /// checked independently.
    pub fn check_recurrence(values: &[BigUint], range: Range<usize>) -> Result<()> {
        let offsets = pentagonal_offsets(range.end.saturating_sub(1));
        for n in range.filter(|&n| n >= 1) {
            if values[n] != next_value(values, n, &offsets) {
                return Err(Error::InvalidTable(alloc::format!(
                    "table entry p({n}) disagrees with the recurrence"
                )));
            }
        }
        Ok(())
    }

    /// Wraps values that already passed [`check_recurrence`](Self::check_recurrence)
    /// over `1..values.len()`; only `p(0) = 1` is checked here.
    pub fn from_checked_values(values: Vec<BigUint>) -> Result<Self> {
        match values.first() {
            None => Err(Error::InvalidTable("empty table".into())),
            Some(v) if !v.is_one() => Err(Error::InvalidTable("table must start with p(0) = 1".into())),
            Some(_) => Ok(CountTable { values }),
        }
    }

    /// Grows the table in place; a no-op when it is already large enough.
    pub fn extend_to(&mut self, max_n: usize, budget: TableBudget) -> Result<()> {
        if max_n <= self.max_n() {
            return Ok(());
        }
        budget.check(max_n)?;
        self.values.reserve(max_n - self.max_n());
        let offsets = pentagonal_offsets(max_n);
        for n in self.values.len()..=max_n {
            let v = next_value(&self.values, n, &offsets);
            self.values.push(v);
        }
        Ok(())
    }

    pub fn max_n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, n: u64) -> Result<&BigUint> {
        usize::try_from(n)
            .ok()
            .and_then(|i| self.values.get(i))
            .ok_or(Error::OutOfRange {
                index: n,
                max_n: self.max_n(),
            })
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    /// Drops entries above `max_n`.
    pub fn truncate(&mut self, max_n: usize) {
        self.values.truncate(max_n + 1);
    }
}

/// Counts partitions of `n` by recursion on the largest part:
/// `q(n, k) = q(n, k - 1) + q(n - k, k)`, where `q(n, k)` counts partitions
/// of `n` with every part at most `k`.
pub fn count_by_enumeration(n: u64, cap: u64) -> Result<BigUint> {
    if n > cap {
        return Err(Error::CapExceeded {
            what: "n",
            requested: n,
            cap,
        });
    }
    let n = n as usize;
    // row[j] holds q(j, k) for the current k.
    let mut row = vec![BigUint::zero(); n + 1];
    row[0] = BigUint::one();
    for k in 1..=n {
        for j in k..=n {
            let (head, tail) = row.split_at_mut(j);
            tail[0] += &head[j - k];
        }
    }
    Ok(row.swap_remove(n))
}

/// `p(floor(x))` for a non-negative real `x`.
pub fn count_at_real(x: f64, table: &CountTable) -> Result<&BigUint> {
    if x.is_nan() || x < 0.0 || !x.is_finite() {
        return Err(Error::Domain(alloc::format!("p(x) needs a finite x >= 0, got {x}")));
    }
    let index = libm::floor(x);
    if index > table.max_n() as f64 {
        return Err(Error::OutOfRange {
            index: index as u64,
            max_n: table.max_n(),
        });
    }
    table.get(index as u64)
}

/// Directed-rounding bounds with `lower <= log2(v) <= upper`.
///
/// Exact for powers of two; otherwise `upper - lower <= 2^-40` whenever
/// `log2(v) < 4096`.
pub fn log2_lower_upper(v: &BigUint) -> Result<(f64, f64)> {
    if v.is_zero() {
        return Err(Error::Domain("log2 needs v >= 1".into()));
    }
    let bits = v.bits() - 1;
    if v.trailing_zeros() == Some(bits) {
        return Ok((bits as f64, bits as f64));
    }
    let iv = RealContext::new(64).log2_uint(v);
    Ok((iv.lo_f64(), iv.hi_f64()))
}
