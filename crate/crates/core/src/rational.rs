//! Exact rationals and square roots of rationals.

use alloc::format;
use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Always kept in lowest terms with a positive denominator.
pub type ExactRational = BigRational;

pub fn int(v: i64) -> ExactRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> ExactRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_biguint(v: &BigUint) -> ExactRational {
    BigRational::from_integer(BigInt::from(v.clone()))
}

/// `"num/den"`, also for integers (`"5/1"`).
pub fn to_num_den(q: &ExactRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn to_f64(q: &ExactRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"a/b"`, an integer, or a finite decimal such as `"1.5"` or `"1e-6"`.
pub fn parse_rational(s: &str) -> Result<ExactRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty()
        || !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: BigInt = format!("{whole}{frac}0").parse().map_err(|_| bad())?;
    let scale = exponent - frac.len() as i32 - 1;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(all * Pow::pow(&ten, scale as u32))
    } else {
        BigRational::new(all, Pow::pow(&ten, scale.unsigned_abs()))
    };
    Ok(value * BigInt::from(sign))
}

/// Largest integer `k` with `k <= q`.
pub fn floor(q: &ExactRational) -> BigInt {
    q.numer().div_floor(q.denom())
}

/// Least non-negative integer `k` with `k^2 >= q` (zero for `q <= 0`).
pub fn ceil_sqrt(q: &ExactRational) -> BigUint {
    let Some(num) = q.numer().to_biguint() else {
        return BigUint::zero();
    };
    let den = q.denom().to_biguint().expect("positive denominator");
    let mut k = (&num / &den).sqrt();
    while &k * &k * &den < num {
        k += 1u32;
    }
    k
}

/// `floor(sqrt(q))` for `q >= 0`.
pub fn floor_sqrt(q: &ExactRational) -> BigUint {
    floor(q).to_biguint().map(|v| v.sqrt()).unwrap_or_default()
}

/// A positive real of the form `sqrt(q)` with `q` rational, such as `3/2` or
/// `sqrt(3)`. Deviations (the `d` in Chebyshev's inequality) are stored this
/// way so that every comparison against `d * radius` can be squared and
/// decided exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Deviation {
    square: ExactRational,
}

impl Deviation {
    pub fn from_square(square: ExactRational) -> Result<Self> {
        if !square.is_positive() {
            return Err(Error::Domain(format!("d must be positive, got d^2 = {square}")));
        }
        Ok(Deviation { square })
    }

    pub fn from_rational(d: ExactRational) -> Result<Self> {
        if !d.is_positive() {
            return Err(Error::Domain(format!("d must be positive, got {d}")));
        }
        Ok(Deviation { square: &d * &d })
    }

    pub fn sqrt3() -> Self {
        Deviation { square: int(3) }
    }

    /// `d^2`.
    pub fn square(&self) -> &ExactRational {
        &self.square
    }

    /// `Some(d)` when `d` itself is rational.
    pub fn as_rational(&self) -> Option<ExactRational> {
        let n = self.square.numer().to_biguint()?;
        let d = self.square.denom().to_biguint()?;
        let (rn, rd) = (n.sqrt(), d.sqrt());
        (&rn * &rn == n && &rd * &rd == d)
            .then(|| BigRational::new(BigInt::from(rn), BigInt::from(rd)))
    }

    pub fn to_f64(&self) -> f64 {
        libm::sqrt(to_f64(&self.square))
    }

    /// `1 - 1/d^2`.
    pub fn chebyshev_mass(&self) -> ExactRational {
        BigRational::one() - self.square.recip()
    }
}

impl fmt::Display for Deviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Some(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            None if self.square.is_integer() => write!(f, "sqrt({})", self.square.numer()),
            None => write!(f, "sqrt({}/{})", self.square.numer(), self.square.denom()),
        }
    }
}

impl FromStr for Deviation {
    type Err = Error;

    /// Accepts `sqrt(q)`, `sqrtq`, or a rational/decimal literal.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("sqrt") {
            let inner = rest
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .unwrap_or(rest);
            Deviation::from_square(parse_rational(inner)?)
        } else {
            Deviation::from_rational(parse_rational(s)?)
        }
    }
}
