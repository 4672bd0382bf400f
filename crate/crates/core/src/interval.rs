//! Fixed-point real intervals with outward rounding.
//!
//! An [`Interval`] at precision `p` is a pair of integers `[lo, hi]` read as
//! `[lo / 2^p, hi / 2^p]`. Every operation rounds the lower end down and the
//! upper end up, so the true real value is always enclosed. Precision is
//! absolute (fractional bits), which suits the log-domain quantities this
//! crate compares: they stay below a few thousand in magnitude.
//!
//! Transcendental values come from [`RealContext`], which evaluates
//! `atanh` and `atan` series in integer arithmetic with explicit error
//! bounds and `GUARD` extra bits.

use core::cmp::Ordering;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

const GUARD: u32 = 32;

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

fn div_floor(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn div_ceil(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

/// `v / 2^bits` rounded toward negative infinity.
fn shr_floor(v: &BigInt, bits: u32) -> BigInt {
    div_floor(v, &pow2(bits))
}

fn shr_ceil(v: &BigInt, bits: u32) -> BigInt {
    div_ceil(v, &pow2(bits))
}

fn ceil_sqrt(v: &BigUint) -> BigUint {
    let s = v.sqrt();
    if &s * &s == *v {
        s
    } else {
        s + 1u32
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

impl Interval {
    fn from_scaled(lo: BigInt, hi: BigInt, prec: u32) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        Interval { lo, hi, prec }
    }

    /// Rounds an interval held at `bits` fractional bits outward to `prec`.
    fn from_wide(lo: &BigInt, hi: &BigInt, bits: u32, prec: u32) -> Self {
        debug_assert!(bits >= prec);
        let g = bits - prec;
        Interval::from_scaled(shr_floor(lo, g), shr_ceil(hi, g), prec)
    }

    pub fn from_int(v: impl Into<BigInt>, prec: u32) -> Self {
        let v = v.into() << prec as usize;
        Interval::from_scaled(v.clone(), v, prec)
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        let scaled = q.numer() << prec as usize;
        Interval::from_scaled(
            div_floor(&scaled, q.denom()),
            div_ceil(&scaled, q.denom()),
            prec,
        )
    }

    /// Smallest interval at `prec` containing both `[lo, hi]` endpoints.
    pub fn hull(a: &Interval, b: &Interval) -> Interval {
        assert_eq!(a.prec, b.prec, "precision mismatch");
        Interval::from_scaled(
            a.lo.clone().min(b.lo.clone()),
            a.hi.clone().max(b.hi.clone()),
            a.prec,
        )
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn lo(&self) -> BigRational {
        BigRational::new(self.lo.clone(), pow2(self.prec))
    }

    pub fn hi(&self) -> BigRational {
        BigRational::new(self.hi.clone(), pow2(self.prec))
    }

    pub fn width(&self) -> BigRational {
        BigRational::new(&self.hi - &self.lo, pow2(self.prec))
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        self.lo() <= *q && *q <= self.hi()
    }

    /// Largest `f64` not above the lower end.
    pub fn lo_f64(&self) -> f64 {
        round_down_f64(&self.lo())
    }

    /// Smallest `f64` not below the upper end.
    pub fn hi_f64(&self) -> f64 {
        round_up_f64(&self.hi())
    }

    pub fn mid_f64(&self) -> f64 {
        libm::ldexp(
            (&self.lo + &self.hi).to_f64().unwrap_or(f64::NAN),
            -(self.prec as i32 + 1),
        )
    }

    /// `Some(ordering)` when the intervals are disjoint or both the same point.
    pub fn compare(&self, other: &Interval) -> Option<Ordering> {
        assert_eq!(self.prec, other.prec, "precision mismatch");
        if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.is_point() && other.is_point() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// `true` when every point of `self` is strictly above every point of `other`.
    pub fn certainly_gt(&self, other: &Interval) -> bool {
        self.lo > other.hi
    }

    pub fn certainly_ge(&self, other: &Interval) -> bool {
        self.lo >= other.hi
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn mul_int(&self, k: &BigInt) -> Interval {
        let (a, b) = (&self.lo * k, &self.hi * k);
        if k.is_negative() {
            Interval::from_scaled(b, a, self.prec)
        } else {
            Interval::from_scaled(a, b, self.prec)
        }
    }

    /// Quotient by an interval that does not contain zero.
    ///
    /// Panics if `other` straddles zero.
    pub fn div(&self, other: &Interval) -> Interval {
        assert_eq!(self.prec, other.prec, "precision mismatch");
        assert!(
            other.lo.is_positive() || other.hi.is_negative(),
            "division by an interval containing zero"
        );
        let p = self.prec as usize;
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for a in [&self.lo, &self.hi] {
            let scaled = a << p;
            for b in [&other.lo, &other.hi] {
                let (f, c) = if b.is_negative() {
                    (div_floor(&-&scaled, &-b), div_ceil(&-&scaled, &-b))
                } else {
                    (div_floor(&scaled, b), div_ceil(&scaled, b))
                };
                lo = Some(lo.map_or(f.clone(), |l| l.min(f)));
                hi = Some(hi.map_or(c.clone(), |h| h.max(c)));
            }
        }
        Interval::from_scaled(lo.unwrap(), hi.unwrap(), self.prec)
    }

    /// Square root of a non-negative interval.
    ///
    /// Panics if the lower end is negative.
    pub fn sqrt(&self) -> Interval {
        assert!(!self.lo.is_negative(), "square root of a negative interval");
        let p = self.prec as usize;
        let lo = (self.lo.to_biguint().unwrap() << p).sqrt();
        let hi = ceil_sqrt(&(self.hi.to_biguint().unwrap() << p));
        Interval::from_scaled(lo.into(), hi.into(), self.prec)
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, rhs: &Interval) -> Interval {
        assert_eq!(self.prec, rhs.prec, "precision mismatch");
        Interval::from_scaled(&self.lo + &rhs.lo, &self.hi + &rhs.hi, self.prec)
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, rhs: &Interval) -> Interval {
        assert_eq!(self.prec, rhs.prec, "precision mismatch");
        Interval::from_scaled(&self.lo - &rhs.hi, &self.hi - &rhs.lo, self.prec)
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::from_scaled(-&self.hi, -&self.lo, self.prec)
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, rhs: &Interval) -> Interval {
        assert_eq!(self.prec, rhs.prec, "precision mismatch");
        let products = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let min = products.iter().min().unwrap();
        let max = products.iter().max().unwrap();
        Interval::from_scaled(shr_floor(min, self.prec), shr_ceil(max, self.prec), self.prec)
    }
}

fn exact_f64(f: f64) -> BigRational {
    BigRational::from_f64(f).expect("finite float")
}

fn round_down_f64(q: &BigRational) -> f64 {
    let mut f = q.to_f64().unwrap_or(0.0);
    if !f.is_finite() {
        return f64::NEG_INFINITY;
    }
    while exact_f64(f) > *q {
        f = f.next_down();
    }
    f
}

fn round_up_f64(q: &BigRational) -> f64 {
    let mut f = q.to_f64().unwrap_or(0.0);
    if !f.is_finite() {
        return f64::INFINITY;
    }
    while exact_f64(f) < *q {
        f = f.next_up();
    }
    f
}

/// `sum_{j>=0} z^(2j+1) / (2j+1)` with alternating signs when `alternating`,
/// for `z = a/b` in `[0, 1/2]`, as a fixed-point enclosure at `w` bits.
///
/// Every computed power and term is a lower bound on the true one with error
/// below `j + 1` and `2` units respectively; once the power vanishes the tail
/// is below `(K + 1) / (1 - z^2)`. `4 (K + 1)` units cover both.
fn arctan_series(a: &BigUint, b: &BigUint, w: u32, alternating: bool) -> (BigInt, BigInt) {
    debug_assert!(a * 2u32 <= *b);
    let a2 = a * a;
    let b2 = b * b;
    let mut power: BigUint = (a << w as usize) / b;
    let mut sum = BigInt::zero();
    let mut j: u32 = 0;
    while !power.is_zero() {
        let term = BigInt::from_biguint(Sign::Plus, &power / (2 * j + 1));
        if alternating && j % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        power = power * &a2 / &b2;
        j += 1;
    }
    let err = BigInt::from(4 * (j + 1));
    if alternating {
        (&sum - &err, sum + err)
    } else {
        (sum.clone(), sum + err)
    }
}

/// A precision level together with the constants evaluated at it.
#[derive(Debug, Clone)]
pub struct RealContext {
    prec: u32,
    ln2_wide: (BigInt, BigInt),
    ln2: Interval,
    pi: Interval,
}

impl RealContext {
    pub fn new(prec: u32) -> Self {
        let w = prec + GUARD;
        let (lo, hi) = arctan_series(&BigUint::one(), &BigUint::from(3u32), w, false);
        let ln2_wide = (lo << 1usize, hi << 1usize);
        let ln2 = Interval::from_wide(&ln2_wide.0, &ln2_wide.1, w, prec);

        // Machin: pi = 16 atan(1/5) - 4 atan(1/239).
        let (a_lo, a_hi) = arctan_series(&BigUint::one(), &BigUint::from(5u32), w, true);
        let (b_lo, b_hi) = arctan_series(&BigUint::one(), &BigUint::from(239u32), w, true);
        let pi_lo = a_lo * 16 - b_hi * 4;
        let pi_hi = a_hi * 16 - b_lo * 4;
        let pi = Interval::from_wide(&pi_lo, &pi_hi, w, prec);

        RealContext { prec, ln2_wide, ln2, pi }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn ln2(&self) -> &Interval {
        &self.ln2
    }

    pub fn pi(&self) -> &Interval {
        &self.pi
    }

    pub fn int(&self, v: impl Into<BigInt>) -> Interval {
        Interval::from_int(v, self.prec)
    }

    pub fn rational(&self, q: &BigRational) -> Interval {
        Interval::from_rational(q, self.prec)
    }

    /// `sqrt(q)` for `q >= 0`, rounded directly from `q`.
    pub fn sqrt_rational(&self, q: &BigRational) -> Interval {
        assert!(!q.is_negative(), "square root of a negative rational");
        let scaled = q.numer() << (2 * self.prec as usize);
        let lo = div_floor(&scaled, q.denom()).to_biguint().unwrap().sqrt();
        let hi = ceil_sqrt(&div_ceil(&scaled, q.denom()).to_biguint().unwrap());
        Interval::from_scaled(lo.into(), hi.into(), self.prec)
    }

    /// `ln(n/d * 2^e)` for small positive `n`, `d`, at `w` bits.
    fn ln_wide(&self, n: &BigUint, d: &BigUint, e: i64, w: u32) -> (BigInt, BigInt) {
        let (k, yn, yd) = normalize(n, d, e);
        let (l2lo, l2hi) = &self.ln2_wide;
        let k_big = BigInt::from(k);
        let (mut lo, mut hi) = if k >= 0 {
            (&k_big * l2lo, &k_big * l2hi)
        } else {
            (&k_big * l2hi, &k_big * l2lo)
        };
        if yn != yd {
            let (slo, shi) = arctan_series(&(&yn - &yd), &(&yn + &yd), w, false);
            lo += slo << 1usize;
            hi += shi << 1usize;
        }
        (lo, hi)
    }

    /// `log2(n/d * 2^e)` for small positive `n`, `d`, at `w` bits.
    fn log2_wide(&self, n: &BigUint, d: &BigUint, e: i64, w: u32) -> (BigInt, BigInt) {
        let (k, yn, yd) = normalize(n, d, e);
        let base = BigInt::from(k) << w as usize;
        if yn == yd {
            return (base.clone(), base);
        }
        let (slo, shi) = arctan_series(&(&yn - &yd), &(&yn + &yd), w, false);
        let (l2lo, l2hi) = &self.ln2_wide;
        // log2(y) = 2 atanh(z) / ln 2, all factors non-negative.
        let lo = div_floor(&(slo << (w as usize + 1)), l2hi);
        let hi = div_ceil(&(shi << (w as usize + 1)), l2lo);
        (&base + lo, base + hi)
    }

    /// Evaluates a monotone log at the two ends of a bracket for `n/d`.
    fn log_enclosure(
        &self,
        n: &BigUint,
        d: &BigUint,
        f: impl Fn(&Self, &BigUint, &BigUint, i64, u32) -> (BigInt, BigInt),
    ) -> Interval {
        assert!(!n.is_zero() && !d.is_zero(), "logarithm of a non-positive value");
        let w = self.prec + GUARD;
        let keep = w as u64 + 8;
        let (n_lo, n_hi, sn) = bracket(n, keep);
        let (d_lo, d_hi, sd) = bracket(d, keep);
        let e = sn as i64 - sd as i64;
        if n_lo == n_hi && d_lo == d_hi {
            let (lo, hi) = f(self, &n_lo, &d_lo, e, w);
            return Interval::from_wide(&lo, &hi, w, self.prec);
        }
        let (lo, _) = f(self, &n_lo, &d_hi, e, w);
        let (_, hi) = f(self, &n_hi, &d_lo, e, w);
        Interval::from_wide(&lo, &hi, w, self.prec)
    }

    /// Natural log of a positive rational.
    pub fn ln_rational(&self, q: &BigRational) -> Interval {
        assert!(q.is_positive(), "logarithm of a non-positive value");
        let n = q.numer().to_biguint().unwrap();
        let d = q.denom().to_biguint().unwrap();
        self.log_enclosure(&n, &d, Self::ln_wide)
    }

    pub fn log2_rational(&self, q: &BigRational) -> Interval {
        assert!(q.is_positive(), "logarithm of a non-positive value");
        let n = q.numer().to_biguint().unwrap();
        let d = q.denom().to_biguint().unwrap();
        self.log_enclosure(&n, &d, Self::log2_wide)
    }

    pub fn ln_uint(&self, v: &BigUint) -> Interval {
        self.log_enclosure(v, &BigUint::one(), Self::ln_wide)
    }

    pub fn log2_uint(&self, v: &BigUint) -> Interval {
        self.log_enclosure(v, &BigUint::one(), Self::log2_wide)
    }

    /// Natural log of a positive interval.
    pub fn ln(&self, x: &Interval) -> Interval {
        assert!(x.is_positive(), "logarithm of a non-positive interval");
        Interval::hull(&self.ln_rational(&x.lo()), &self.ln_rational(&x.hi()))
    }

    pub fn log2(&self, x: &Interval) -> Interval {
        assert!(x.is_positive(), "logarithm of a non-positive interval");
        Interval::hull(&self.log2_rational(&x.lo()), &self.log2_rational(&x.hi()))
    }
}

/// Splits `v` into `[t, t + 1] * 2^s` with `t` at most `keep` bits; the two
/// ends coincide when the dropped bits are all zero.
fn bracket(v: &BigUint, keep: u64) -> (BigUint, BigUint, u64) {
    let bits = v.bits();
    if bits <= keep {
        return (v.clone(), v.clone(), 0);
    }
    let s = bits - keep;
    let t = v >> s as usize;
    let exact = (&t << s as usize) == *v;
    let hi = if exact { t.clone() } else { &t + 1u32 };
    (t, hi, s)
}

/// Writes `n/d * 2^e = 2^k * yn/yd` with `yn/yd` in `[1, 2)`.
fn normalize(n: &BigUint, d: &BigUint, e: i64) -> (i64, BigUint, BigUint) {
    let mut k = n.bits() as i64 - d.bits() as i64;
    let (mut yn, yd) = if k >= 0 {
        (n.clone(), d << k as usize)
    } else {
        (n << (-k) as usize, d.clone())
    };
    if yn < yd {
        k -= 1;
        yn <<= 1usize;
    }
    (k + e, yn, yd)
}
