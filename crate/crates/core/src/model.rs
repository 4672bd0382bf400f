//! The coin-flip encoding of partitions.
//!
//! Flip `t` (1-based) that lands tails adds a part of size `X_{t-1} + 1`,
//! where `X_{t-1}` is the number of heads among the first `t - 1` flips.
//! Reading the flips as a walk along the boundary of the Young diagram
//! (heads step right, tails step down) gives the same multiset of parts, so
//! the walk itself is never materialized.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flip {
    Head,
    Tail,
}

impl Flip {
    pub fn as_char(self) -> char {
        match self {
            Flip::Head => 'H',
            Flip::Tail => 'T',
        }
    }
}

/// An ordered sequence of `m` flips, one sample point of `{H, T}^m`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CoinSequence {
    flips: Vec<Flip>,
}

impl CoinSequence {
    pub fn new(flips: Vec<Flip>) -> Self {
        CoinSequence { flips }
    }

    /// Decodes the low `m` bits of `bits`; bit `t - 1` set means flip `t` is a head.
    ///
    /// Panics if `m > 64`.
    pub fn from_bits(bits: u64, m: usize) -> Self {
        assert!(m <= 64, "at most 64 flips fit in a u64");
        let flips = (0..m)
            .map(|i| if bits >> i & 1 == 1 { Flip::Head } else { Flip::Tail })
            .collect();
        CoinSequence { flips }
    }

    pub fn len(&self) -> usize {
        self.flips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flips.is_empty()
    }

    pub fn flips(&self) -> &[Flip] {
        &self.flips
    }

    pub fn heads(&self) -> usize {
        self.flips.iter().filter(|&&f| f == Flip::Head).count()
    }
}

impl fmt::Display for CoinSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for flip in &self.flips {
            write!(f, "{}", flip.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for CoinSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let flips = s
            .trim()
            .chars()
            .map(|c| match c {
                'H' => Ok(Flip::Head),
                'T' => Ok(Flip::Tail),
                other => Err(Error::Parse(alloc::format!(
                    "flip sequences use only 'H' and 'T', found {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CoinSequence { flips })
    }
}

/// A partition stored as weakly decreasing positive parts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u64>,
}

impl Partition {
    /// Validates that `parts` is weakly decreasing and strictly positive.
    pub fn new(parts: Vec<u64>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::InvalidPartition("parts must be positive".to_string()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(
                "parts must be weakly decreasing".to_string(),
            ));
        }
        Ok(Partition { parts })
    }

    pub fn empty() -> Self {
        Partition::default()
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn size(&self) -> u64 {
        self.parts.iter().sum()
    }

    pub fn length(&self) -> usize {
        self.parts.len()
    }

    pub fn largest(&self) -> u64 {
        self.parts.first().copied().unwrap_or(0)
    }

    /// Boxes `(i, j)` with `1 <= i <= length` and `1 <= j <= parts[i-1]`.
    pub fn boxes(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, &len)| (1..=len).map(move |j| (i + 1, j)))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("]")
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(alloc::format!("expected [a,b,...], got {s:?}")))?;
        if inner.trim().is_empty() {
            return Ok(Partition::empty());
        }
        let parts = inner
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u64>()
                    .map_err(|e| Error::Parse(alloc::format!("bad part {p:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

/// The derived series of one flip sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipProcess {
    /// `X_0..=X_m`, heads among the first `t` flips.
    pub heads_prefix: Vec<u64>,
    /// `C_1..=C_m`, stored at index `t - 1`.
    pub contributions: Vec<u64>,
    /// `Y`, the number of tails (length of the partition).
    pub tails_total: u64,
    /// `N = Y + sum C_t`, the size of the partition.
    pub total_size: u64,
}

impl FlipProcess {
    pub fn m(&self) -> usize {
        self.contributions.len()
    }

    /// `C_t` for `1 <= t <= m`.
    pub fn contribution(&self, t: usize) -> u64 {
        self.contributions[t - 1]
    }

    /// `X_t` for `0 <= t <= m`.
    pub fn heads_after(&self, t: usize) -> u64 {
        self.heads_prefix[t]
    }
}

pub fn flip_process(seq: &CoinSequence) -> FlipProcess {
    let m = seq.len();
    let mut heads_prefix = Vec::with_capacity(m + 1);
    let mut contributions = Vec::with_capacity(m);
    let mut heads = 0u64;
    let mut tails = 0u64;
    let mut sum_c = 0u64;
    heads_prefix.push(0);
    for &flip in seq.flips() {
        match flip {
            Flip::Head => {
                contributions.push(0);
                heads += 1;
            }
            Flip::Tail => {
                contributions.push(heads);
                sum_c += heads;
                tails += 1;
            }
        }
        heads_prefix.push(heads);
    }
    FlipProcess {
        heads_prefix,
        contributions,
        tails_total: tails,
        total_size: tails + sum_c,
    }
}

pub fn partition_from_flips(seq: &CoinSequence) -> Partition {
    let mut heads = 0u64;
    let mut parts = Vec::with_capacity(seq.len() - seq.heads());
    for &flip in seq.flips() {
        match flip {
            Flip::Head => heads += 1,
            Flip::Tail => parts.push(heads + 1),
        }
    }
    // Tails see non-decreasing head counts, so reversing sorts the parts.
    parts.reverse();
    Partition { parts }
}

/// Size `N` of the partition encoded by the low `m` bits of `bits`
/// (bit set = head), without building the partition.
pub fn size_from_bits(bits: u64, m: usize) -> u64 {
    let mut heads = 0u64;
    let mut size = 0u64;
    for i in 0..m {
        if bits >> i & 1 == 1 {
            heads += 1;
        } else {
            size += heads + 1;
        }
    }
    size
}

/// Inverse of [`partition_from_flips`] at a fixed flip count `m`.
///
/// Requires `length <= m` and `largest <= m - length + 1`.
pub fn flips_from_partition(p: &Partition, m: usize) -> Result<CoinSequence> {
    let len = p.length();
    let heads_needed = p.largest().saturating_sub(1);
    if len > m || heads_needed > (m - len) as u64 {
        return Err(Error::NotRepresentable {
            partition: p.to_string(),
            m,
        });
    }
    let mut flips = Vec::with_capacity(m);
    let mut heads = 0u64;
    for &part in p.parts().iter().rev() {
        while heads + 1 < part {
            flips.push(Flip::Head);
            heads += 1;
        }
        flips.push(Flip::Tail);
    }
    flips.resize(m, Flip::Head);
    Ok(CoinSequence { flips })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(s: &str) -> CoinSequence {
        s.parse().unwrap()
    }

    #[test]
    fn ten_flip_example() {
        let p = partition_from_flips(&seq("HTTHHTHHTH"));
        assert_eq!(p.parts(), &[6, 4, 2, 2]);
        assert_eq!(p.to_string(), "[6,4,2,2]");
        assert_eq!(p.size(), 14);
        assert_eq!(p.length(), 4);
    }

    #[test]
    fn all_heads_is_empty() {
        let p = partition_from_flips(&seq("HHHH"));
        assert_eq!(p, Partition::empty());
        assert_eq!(p.to_string(), "[]");
        assert_eq!(p.size(), 0);
    }

    #[test]
    fn all_tails_gives_ones() {
        let p = partition_from_flips(&seq("TTT"));
        assert_eq!(p.parts(), &[1, 1, 1]);
        assert_eq!(p.size(), 3);
    }

    #[test]
    fn empty_sequence_maps_to_empty_partition() {
        assert_eq!(partition_from_flips(&seq("")), Partition::empty());
        let fp = flip_process(&seq(""));
        assert_eq!(fp.heads_prefix, [0]);
        assert_eq!(fp.total_size, 0);
    }

    #[test]
    fn process_of_ten_flip_example() {
        let fp = flip_process(&seq("HTTHHTHHTH"));
        assert_eq!(fp.tails_total, 4);
        assert_eq!(fp.total_size, 14);
        let expected_c = [0, 1, 1, 0, 0, 3, 0, 0, 5, 0];
        assert_eq!(fp.contributions, expected_c);
        assert_eq!(fp.heads_prefix, [0, 1, 1, 1, 2, 3, 3, 4, 5, 5, 6]);
    }

    #[test]
    fn process_single_tail() {
        let fp = flip_process(&seq("T"));
        assert_eq!(fp.heads_prefix, [0, 0]);
        assert_eq!(fp.contributions, [0]);
        assert_eq!(fp.tails_total, 1);
        assert_eq!(fp.total_size, 1);
    }

    #[test]
    fn process_hht() {
        let fp = flip_process(&seq("HHT"));
        assert_eq!(fp.contribution(3), 2);
        assert_eq!(fp.tails_total, 1);
        assert_eq!(fp.total_size, 3);
    }

    #[test]
    fn inverse_examples() {
        let p: Partition = "[6,4,2,2]".parse().unwrap();
        assert_eq!(flips_from_partition(&p, 10).unwrap().to_string(), "HTTHHTHHTH");
        assert_eq!(flips_from_partition(&Partition::empty(), 3).unwrap().to_string(), "HHH");
        let three = Partition::new(alloc::vec![3]).unwrap();
        assert!(matches!(
            flips_from_partition(&three, 2),
            Err(Error::NotRepresentable { m: 2, .. })
        ));
        assert_eq!(flips_from_partition(&three, 3).unwrap().to_string(), "HHT");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Partition::new(alloc::vec![1, 2]).is_err());
        assert!(Partition::new(alloc::vec![2, 0]).is_err());
        assert!("HTX".parse::<CoinSequence>().is_err());
        assert!("6,4".parse::<Partition>().is_err());
        assert_eq!("[ ]".parse::<Partition>().unwrap(), Partition::empty());
    }

    #[test]
    fn boxes_match_size() {
        let p: Partition = "[3,1]".parse().unwrap();
        let boxes: Vec<_> = p.boxes().collect();
        assert_eq!(boxes, [(1, 1), (1, 2), (1, 3), (2, 1)]);
    }

    #[test]
    fn bits_agree_with_sequence() {
        for m in 0..=8 {
            for bits in 0..1u64 << m {
                let s = CoinSequence::from_bits(bits, m);
                assert_eq!(size_from_bits(bits, m), partition_from_flips(&s).size());
            }
        }
    }

    fn arb_partition() -> impl Strategy<Value = Partition> {
        proptest::collection::vec(1u64..12, 0..10).prop_map(|mut parts| {
            parts.sort_unstable_by(|a, b| b.cmp(a));
            Partition::new(parts).unwrap()
        })
    }

    proptest! {
        #[test]
        fn round_trip(p in arb_partition(), extra in 0usize..5) {
            let m = p.length() + p.largest().saturating_sub(1) as usize + extra;
            let s = flips_from_partition(&p, m).unwrap();
            prop_assert_eq!(s.len(), m);
            prop_assert_eq!(partition_from_flips(&s), p);
        }

        #[test]
        fn size_identity_and_monotone_contributions(bits in any::<u64>(), m in 0usize..=64) {
            let s = CoinSequence::from_bits(bits, m);
            let fp = flip_process(&s);
            let p = partition_from_flips(&s);
            prop_assert_eq!(p.size(), fp.total_size);
            prop_assert_eq!(fp.tails_total + fp.contributions.iter().sum::<u64>(), fp.total_size);
            prop_assert_eq!(fp.tails_total as usize, p.length());
            for t in 1..=m {
                let step = fp.heads_after(t) - fp.heads_after(t - 1);
                prop_assert_eq!(step == 1, s.flips()[t - 1] == Flip::Head);
            }
            let tail_cs: Vec<u64> = (1..=m)
                .filter(|&t| s.flips()[t - 1] == Flip::Tail)
                .map(|t| fp.contribution(t))
                .collect();
            prop_assert!(tail_cs.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn text_round_trip(bits in any::<u64>(), m in 0usize..=64) {
            let s = CoinSequence::from_bits(bits, m);
            prop_assert_eq!(s.to_string().parse::<CoinSequence>().unwrap(), s.clone());
            let p = partition_from_flips(&s);
            prop_assert_eq!(p.to_string().parse::<Partition>().unwrap(), p);
        }
    }
}
