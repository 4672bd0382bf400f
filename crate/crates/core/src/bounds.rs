//! Lower-bound chain for `p(n)`, checked against exact values.
//!
//! Each check compares two sides of an inequality and returns a
//! [`BoundVerdict`]. Where both sides are rational the comparison is exact.
//! Otherwise both sides are enclosed in log2 space by [`Interval`]s; a
//! verdict that comes out indeterminate is retried at twice the precision,
//! up to [`MAX_PRECISION`] bits.
//!
//! Deviations `d` are carried as `d^2` (see [`Deviation`]), and every
//! argument of `p` is floored exactly before lookup.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::count::CountTable;
use crate::interval::{Interval, RealContext};
use crate::rational::{ceil_sqrt, floor, floor_sqrt, int, ratio, Deviation, ExactRational};
use crate::{Error, Result};

/// Working precision of the first attempt, in fractional bits.
pub const DEFAULT_PRECISION: u32 = 96;
/// Last precision tried before a verdict is left indeterminate.
pub const MAX_PRECISION: u32 = DEFAULT_PRECISION << 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Holds,
    Fails,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "Holds",
            Verdict::Fails => "Fails",
            Verdict::Indeterminate => "Indeterminate",
        }
    }

    fn from_bool(holds: bool) -> Self {
        if holds {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which inequality a verdict is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subject {
    /// `sum_{n in window} p(n) > 2^m (1 - 1/d^2)`.
    WindowSum,
    /// `p(m(m+3)/8 + d m^{3/2}/4) > 2^{m+1} (1 - 1/d^2) / (d m^{3/2})`.
    Pointwise,
    /// `p(m^2 (1+eta) / 8) > 2^m * 4 / (3 sqrt(3) m^{3/2})`.
    Dagger,
    /// `p(n) >= 2^{8 sqrt(n)/3} / (2^{5/2} n^{3/4})`.
    Explicit,
    /// `ln p(n) / sqrt(n) > sqrt(8) ln 2 / (1 + eps)`.
    Star,
    /// `ln p(n) <= 2 sqrt(pi^2/6) sqrt(n)`.
    Upper,
    /// A deliberately false inequality, `p(n) < 2^{8 sqrt(n)/3} / (2^{5/2} n^{3/4})`,
    /// used to exercise failure reporting.
    Control,
}

impl Subject {
    pub fn name(self) -> &'static str {
        match self {
            Subject::WindowSum => "window",
            Subject::Pointwise => "pointwise",
            Subject::Dagger => "dagger",
            Subject::Explicit => "explicit",
            Subject::Star => "star",
            Subject::Upper => "upper",
            Subject::Control => "control",
        }
    }
}

/// How the left side must relate to the right side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Greater,
    GreaterOrEqual,
    Less,
    LessOrEqual,
}

impl Relation {
    /// `None` when the enclosures cannot settle the relation.
    pub fn decide(self, lhs: &Interval, rhs: &Interval) -> Option<bool> {
        match self {
            Relation::Greater => {
                if lhs.certainly_gt(rhs) {
                    Some(true)
                } else if rhs.certainly_ge(lhs) {
                    Some(false)
                } else {
                    None
                }
            }
            Relation::GreaterOrEqual => {
                if lhs.certainly_ge(rhs) {
                    Some(true)
                } else if rhs.certainly_gt(lhs) {
                    Some(false)
                } else {
                    None
                }
            }
            Relation::Less => Relation::Greater.decide(rhs, lhs),
            Relation::LessOrEqual => Relation::GreaterOrEqual.decide(rhs, lhs),
        }
    }
}

fn fmt_rational(q: &ExactRational) -> String {
    if q.is_integer() {
        alloc::format!("{}", q.numer())
    } else {
        alloc::format!("{}/{}", q.numer(), q.denom())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundParams {
    pub m: Option<u64>,
    pub n: Option<u64>,
    pub d: Option<Deviation>,
    pub eta: Option<ExactRational>,
    pub epsilon: Option<ExactRational>,
}

impl fmt::Display for BoundParams {
    /// `key=value` pairs joined by `;`, e.g. `m=3;d=sqrt(3)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if let Some(m) = self.m {
            parts.push(alloc::format!("m={m}"));
        }
        if let Some(n) = self.n {
            parts.push(alloc::format!("n={n}"));
        }
        if let Some(d) = &self.d {
            parts.push(alloc::format!("d={d}"));
        }
        if let Some(eta) = &self.eta {
            parts.push(alloc::format!("eta={}", fmt_rational(eta)));
        }
        if let Some(eps) = &self.epsilon {
            parts.push(alloc::format!("eps={}", fmt_rational(eps)));
        }
        f.write_str(&parts.join(";"))
    }
}

/// One checked inequality. Both sides are reported as log2 enclosures
/// rounded outward to `f64`; a non-positive side reports `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundVerdict {
    pub subject: Subject,
    pub params: BoundParams,
    pub lhs_log2: (f64, f64),
    pub rhs_log2: (f64, f64),
    pub verdict: Verdict,
    /// Precision of the deciding attempt; 0 for exact comparisons.
    pub precision: u32,
}

impl BoundVerdict {
    /// Lower bound on `lhs_log2 - rhs_log2` (as `f64`, for reporting).
    pub fn margin(&self) -> f64 {
        self.lhs_log2.0 - self.rhs_log2.1
    }
}

const NEG_INF: (f64, f64) = (f64::NEG_INFINITY, f64::NEG_INFINITY);

fn pair(iv: &Interval) -> (f64, f64) {
    (iv.lo_f64(), iv.hi_f64())
}

/// Named constants of the lower-bound chain, as enclosures.
#[derive(Debug, Clone)]
pub struct Constants {
    /// `sqrt(8) ln 2`, about 1.9605.
    pub c_star: Interval,
    /// `2 sqrt(pi^2 / 6)`, about 2.5651.
    pub c_upper: Interval,
    /// `(8/3) ln 2`, about 1.8484.
    pub c_explicit: Interval,
    /// `sqrt(3)`, the maximizer of `(1/d)(1 - 1/d^2)`.
    pub d_opt: Interval,
    /// `2 / (3 sqrt(3))`, the maximum value.
    pub window_factor: Interval,
}

impl Constants {
    pub fn at(ctx: &RealContext) -> Self {
        let ln2 = ctx.ln2();
        let c_star = &ctx.sqrt_rational(&int(8)) * ln2;
        let pi_sq_over_6 = (ctx.pi() * ctx.pi()).div(&ctx.int(6));
        let c_upper = pi_sq_over_6.sqrt().mul_int(&BigInt::from(2));
        let c_explicit = &ctx.rational(&ratio(8, 3)) * ln2;
        let d_opt = ctx.sqrt_rational(&int(3));
        let window_factor = ctx.int(2).div(&d_opt.mul_int(&BigInt::from(3)));
        Constants {
            c_star,
            c_upper,
            c_explicit,
            d_opt,
            window_factor,
        }
    }
}

/// `(1/d)(1 - 1/d^2)`, the factor the window argument leaves in front of `2^m`.
pub fn window_gain(d: f64) -> f64 {
    (1.0 - 1.0 / (d * d)) / d
}

/// Grid maximizer of [`window_gain`] over `[lo, hi]` with spacing `step`.
pub fn grid_argmax(lo: f64, hi: f64, step: f64) -> f64 {
    let steps = libm::floor((hi - lo) / step) as u64;
    (0..=steps)
        .map(|i| lo + i as f64 * step)
        .fold((lo, f64::NEG_INFINITY), |best, d| {
            let v = window_gain(d);
            if v > best.1 {
                (d, v)
            } else {
                best
            }
        })
        .0
}

/// `(sqrt(3), 2/(3 sqrt(3)))` at the default precision.
pub fn optimal_d() -> (Interval, Interval) {
    let c = Constants::at(&RealContext::new(DEFAULT_PRECISION));
    (c.d_opt, c.window_factor)
}

/// The integers `n >= 0` with `|n - m(m+3)/8| < d m^{3/2} / 4`, as an
/// inclusive range, or `None` when no integer qualifies.
pub fn window(m: u64, d: &Deviation) -> Result<Option<(u64, u64)>> {
    if m < 3 {
        return Err(Error::Domain(alloc::format!(
            "the concentration window needs m >= 3, got m = {m}"
        )));
    }
    // With D = 8n - m(m+3): |D| < sqrt(4 d^2 m^3), i.e. |D| < T for the
    // least integer T with T^2 >= 4 d^2 m^3.
    let m_r = int(m as i64);
    let limit = ceil_sqrt(&(d.square() * &m_r * &m_r * &m_r * int(4)));
    if limit.is_zero() {
        return Ok(None);
    }
    let center = BigInt::from(m) * BigInt::from(m + 3);
    let reach = BigInt::from(limit) - 1;
    let lo = BigRational::new(&center - &reach, BigInt::from(8)).ceil().to_integer();
    let hi = floor(&BigRational::new(&center + &reach, BigInt::from(8)));
    let lo = lo.max(BigInt::zero());
    if lo > hi {
        return Ok(None);
    }
    Ok(Some((lo.to_u64().unwrap(), hi.to_u64().unwrap())))
}

/// Least `m >= 3` with `3m/8 + sqrt(3) m^{3/2}/4 < eta m^2/8`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaThreshold {
    pub eta: ExactRational,
    pub m: u64,
    /// The inequality also holds for each of the next 100 values of `m`.
    pub holds_next_100: bool,
}

/// Whether `3m/8 + sqrt(3) m^{3/2}/4 < eta m^2/8`, decided exactly as
/// `eta m^2 - 3m > 0` and `(eta m^2 - 3m)^2 > 12 m^3`.
pub fn eta_condition(m: u64, eta: &ExactRational) -> bool {
    let m = int(m as i64);
    let slack = eta * &m * &m - &m * int(3);
    slack.is_positive() && &slack * &slack > &m * &m * &m * int(12)
}

/// Scans for the least `m >= 3` satisfying [`eta_condition`].
///
/// In `x = sqrt(m)` the condition reads `eta x^2 - 2 sqrt(3) x - 3 > 0`,
/// which holds exactly beyond the positive root, so the scan starts just
/// below the root's floating-point estimate and walks to the exact answer.
pub fn eta_threshold(eta: &ExactRational) -> Result<EtaThreshold> {
    if !eta.is_positive() {
        return Err(Error::Domain("eta must be positive".into()));
    }
    let e = eta.to_f64().unwrap_or(f64::MAX);
    let root = (libm::sqrt(3.0) + libm::sqrt(3.0 + 3.0 * e)) / e;
    let estimate = root * root;
    if estimate.is_nan() || estimate >= 1e15 {
        return Err(Error::Domain(alloc::format!(
            "eta = {} puts the threshold beyond 10^15",
            fmt_rational(eta)
        )));
    }
    let mut m = (libm::floor(estimate) as u64).saturating_sub(2).max(3);
    while m > 3 && eta_condition(m - 1, eta) {
        m -= 1;
    }
    while !eta_condition(m, eta) {
        m += 1;
    }
    Ok(EtaThreshold {
        eta: eta.clone(),
        m,
        holds_next_100: (m + 1..=m + 100).all(|k| eta_condition(k, eta)),
    })
}

/// `log2` of `2^{8 sqrt(n)/3} / (2^{5/2} n^{3/4})`, that is
/// `(8/3) sqrt(n) - 5/2 - (3/4) log2(n)`.
pub fn explicit_bound_log2(n: u64, ctx: &RealContext) -> Interval {
    let n_r = int(n as i64);
    let root = ctx.sqrt_rational(&n_r);
    let lead = &ctx.rational(&ratio(8, 3)) * &root;
    let tail = &ctx.rational(&ratio(3, 4)) * &ctx.log2_rational(&n_r);
    &(&lead - &ctx.rational(&ratio(5, 2))) - &tail
}

/// Enclosure of `log2` of the explicit bound at the default precision.
pub fn explicit_bound_value(n: u64) -> Result<Interval> {
    if n == 0 {
        return Err(Error::Domain("the explicit bound is defined for n >= 1".into()));
    }
    Ok(explicit_bound_log2(n, &RealContext::new(DEFAULT_PRECISION)))
}

/// `ln p(n) / sqrt(n)` with its two flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub n: u64,
    pub ratio: (f64, f64),
    /// Ratio strictly above `sqrt(8) ln 2`.
    pub above_c_star: Verdict,
    /// Ratio at most `2 sqrt(pi^2/6)`.
    pub below_c_upper: Verdict,
}

/// Scan result for `ln p(n)/sqrt(n) > sqrt(8) ln 2/(1 + eps)` at one `eps`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarThreshold {
    pub epsilon: ExactRational,
    /// Least `N` such that the ratio clears `sqrt(8) ln 2 / (1 + eps)` for
    /// every `N <= n <= scanned_max`.
    pub n: u64,
    pub scanned_max: u64,
    /// The largest `n` in range where it did not clear, if any.
    pub last_failure: Option<u64>,
}

/// Summary of an explicit-bound sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitSweep {
    pub verdicts: Vec<BoundVerdict>,
    pub holds: u64,
    pub fails: u64,
    pub indeterminate: u64,
    /// Smallest lower bound on `log2 p(n) - log2 bound` and where it occurs.
    pub min_margin: f64,
    pub min_margin_at: u64,
}

impl ExplicitSweep {
    pub fn from_verdicts(verdicts: Vec<BoundVerdict>) -> Self {
        let mut sweep = ExplicitSweep {
            verdicts: Vec::new(),
            holds: 0,
            fails: 0,
            indeterminate: 0,
            min_margin: f64::INFINITY,
            min_margin_at: 0,
        };
        for v in &verdicts {
            match v.verdict {
                Verdict::Holds => sweep.holds += 1,
                Verdict::Fails => sweep.fails += 1,
                Verdict::Indeterminate => sweep.indeterminate += 1,
            }
            if v.margin() < sweep.min_margin {
                sweep.min_margin = v.margin();
                sweep.min_margin_at = v.params.n.unwrap_or(0);
            }
        }
        sweep.verdicts = verdicts;
        sweep
    }

    pub fn all_hold(&self) -> bool {
        self.fails == 0 && self.indeterminate == 0
    }
}

/// Runs the table-backed checks. Contexts for every precision level are
/// built once up front; the checker is immutable and can be shared across
/// threads.
#[derive(Debug, Clone)]
pub struct BoundChecker<'t> {
    table: &'t CountTable,
    contexts: Vec<RealContext>,
}

impl<'t> BoundChecker<'t> {
    pub fn new(table: &'t CountTable) -> Self {
        Self::with_precisions(table, DEFAULT_PRECISION, MAX_PRECISION)
    }

    /// Tries `start, 2 start, 4 start, ...` up to `max` bits.
    pub fn with_precisions(table: &'t CountTable, start: u32, max: u32) -> Self {
        let mut contexts = Vec::new();
        let mut prec = start.max(8);
        while prec <= max.max(start) {
            contexts.push(RealContext::new(prec));
            prec *= 2;
        }
        BoundChecker { table, contexts }
    }

    pub fn table(&self) -> &CountTable {
        self.table
    }

    pub fn base_context(&self) -> &RealContext {
        &self.contexts[0]
    }

    fn p(&self, n: u64) -> Result<&'t BigUint> {
        self.table.get(n)
    }

    /// Evaluates both sides at increasing precision until `relation` is settled.
    pub fn decide(
        &self,
        subject: Subject,
        params: BoundParams,
        relation: Relation,
        eval: impl Fn(&RealContext) -> (Interval, Interval),
    ) -> BoundVerdict {
        let mut last = None;
        for ctx in &self.contexts {
            let (lhs, rhs) = eval(ctx);
            let decided = relation.decide(&lhs, &rhs);
            last = Some((lhs, rhs, ctx.prec()));
            if let Some(holds) = decided {
                let (lhs, rhs, precision) = last.unwrap();
                return BoundVerdict {
                    subject,
                    params,
                    lhs_log2: pair(&lhs),
                    rhs_log2: pair(&rhs),
                    verdict: Verdict::from_bool(holds),
                    precision,
                };
            }
        }
        let (lhs, rhs, precision) = last.expect("at least one precision level");
        BoundVerdict {
            subject,
            params,
            lhs_log2: pair(&lhs),
            rhs_log2: pair(&rhs),
            verdict: Verdict::Indeterminate,
            precision,
        }
    }

    fn log2_or_neg_inf(&self, v: &ExactRational) -> (f64, f64) {
        if v.is_positive() {
            pair(&self.base_context().log2_rational(v))
        } else {
            NEG_INF
        }
    }

    /// Exact check of `sum_{n in window(m, d)} p(n) > 2^m (1 - 1/d^2)`.
    pub fn window_sum(&self, m: u64, d: &Deviation) -> Result<BoundVerdict> {
        let range = window(m, d)?;
        let mut sum = BigUint::zero();
        if let Some((lo, hi)) = range {
            self.p(hi)?;
            for n in lo..=hi {
                sum += self.p(n)?;
            }
        }
        let lhs = BigRational::from_integer(BigInt::from(sum));
        let rhs = BigRational::from_integer(BigInt::one() << m as usize) * d.chebyshev_mass();
        Ok(BoundVerdict {
            subject: Subject::WindowSum,
            params: BoundParams {
                m: Some(m),
                d: Some(d.clone()),
                ..Default::default()
            },
            lhs_log2: self.log2_or_neg_inf(&lhs),
            rhs_log2: self.log2_or_neg_inf(&rhs),
            verdict: Verdict::from_bool(lhs > rhs),
            precision: 0,
        })
    }

    /// The argument `floor(m(m+3)/8 + d m^{3/2}/4)` of the pointwise bound.
    pub fn pointwise_argument(m: u64, d: &Deviation) -> u64 {
        // (m(m+3) + sqrt(4 d^2 m^3)) / 8, floored; m(m+3) is an integer.
        let m_r = int(m as i64);
        let root = floor_sqrt(&(d.square() * &m_r * &m_r * &m_r * int(4)));
        let total = BigUint::from(m) * BigUint::from(m + 3) + root;
        (total / 8u32).to_u64().expect("argument fits in u64")
    }

    /// `p(floor(m(m+3)/8 + d m^{3/2}/4)) > 2^{m+1} (1 - 1/d^2) / (d m^{3/2})`.
    pub fn pointwise(&self, m: u64, d: &Deviation) -> Result<BoundVerdict> {
        if m < 3 {
            return Err(Error::Domain(alloc::format!(
                "the pointwise bound needs m >= 3, got m = {m}"
            )));
        }
        let p = self.p(Self::pointwise_argument(m, d))?;
        let params = BoundParams {
            m: Some(m),
            d: Some(d.clone()),
            ..Default::default()
        };
        let mass = d.chebyshev_mass();
        if !mass.is_positive() {
            return Ok(BoundVerdict {
                subject: Subject::Pointwise,
                params,
                lhs_log2: pair(&self.base_context().log2_uint(p)),
                rhs_log2: NEG_INF,
                verdict: Verdict::Holds,
                precision: 0,
            });
        }
        let m_r = int(m as i64);
        Ok(self.decide(Subject::Pointwise, params, Relation::Greater, |ctx| {
            let lhs = ctx.log2_uint(p);
            let half = ctx.rational(&ratio(1, 2));
            let three_halves = ctx.rational(&ratio(3, 2));
            let rhs = &(&ctx.int(m as i64 + 1) + &ctx.log2_rational(&mass))
                - &(&(&half * &ctx.log2_rational(d.square()))
                    + &(&three_halves * &ctx.log2_rational(&m_r)));
            (lhs, rhs)
        }))
    }

    /// `p(floor(m^2 (1+eta)/8)) > 2^m * 4 / (3 sqrt(3) m^{3/2})`, without
    /// checking that `m` has reached [`eta_threshold`]; useful for
    /// diagnostics below the threshold.
    pub fn dagger_raw(&self, m: u64, eta: &ExactRational) -> Result<BoundVerdict> {
        if m == 0 || !eta.is_positive() {
            return Err(Error::Domain("the dagger bound needs m >= 1 and eta > 0".into()));
        }
        let m_r = int(m as i64);
        let arg = floor(&(&m_r * &m_r * (eta + int(1)) / int(8)));
        let p = self.p(arg.to_u64().expect("argument fits in u64"))?;
        let params = BoundParams {
            m: Some(m),
            eta: Some(eta.clone()),
            ..Default::default()
        };
        Ok(self.decide(Subject::Dagger, params, Relation::Greater, |ctx| {
            // log2(2^m * 4 / (3 sqrt(3) m^{3/2})) = m + 2 - (3/2) log2(3m).
            let three_halves = ctx.rational(&ratio(3, 2));
            let rhs = &ctx.int(m as i64 + 2) - &(&three_halves * &ctx.log2_rational(&(&m_r * int(3))));
            (ctx.log2_uint(p), rhs)
        }))
    }

    /// [`dagger_raw`](Self::dagger_raw) for `m` at or beyond [`eta_threshold`].
    pub fn dagger(&self, m: u64, eta: &ExactRational) -> Result<BoundVerdict> {
        let threshold = eta_threshold(eta)?.m;
        if m < threshold {
            return Err(Error::PreconditionNotMet { m, threshold });
        }
        self.dagger_raw(m, eta)
    }

    /// `p(n) >= 2^{8 sqrt(n)/3} / (2^{5/2} n^{3/4})`.
    pub fn explicit(&self, n: u64) -> Result<BoundVerdict> {
        self.explicit_with(n, Subject::Explicit, Relation::GreaterOrEqual)
    }

    /// The false inequality `p(n) < bound(n)`; fails wherever [`explicit`](Self::explicit) holds.
    pub fn control(&self, n: u64) -> Result<BoundVerdict> {
        self.explicit_with(n, Subject::Control, Relation::Less)
    }

    fn explicit_with(&self, n: u64, subject: Subject, relation: Relation) -> Result<BoundVerdict> {
        if n == 0 {
            return Err(Error::Domain("the explicit bound is defined for n >= 1".into()));
        }
        let p = self.p(n)?;
        let params = BoundParams {
            n: Some(n),
            ..Default::default()
        };
        Ok(self.decide(subject, params, relation, |ctx| {
            (ctx.log2_uint(p), explicit_bound_log2(n, ctx))
        }))
    }

    /// Explicit bound for every `n` in `n_lo..=n_hi` (requires `n_lo >= 2`).
    pub fn explicit_sweep(&self, n_lo: u64, n_hi: u64) -> Result<ExplicitSweep> {
        if n_lo < 2 || n_lo > n_hi {
            return Err(Error::Domain(alloc::format!(
                "explicit sweep needs 2 <= n_lo <= n_hi, got {n_lo}..={n_hi}"
            )));
        }
        self.p(n_hi)?;
        let verdicts = (n_lo..=n_hi)
            .map(|n| self.explicit(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExplicitSweep::from_verdicts(verdicts))
    }

    /// `ln p(n) <= 2 sqrt(pi^2/6) sqrt(n)`, compared as
    /// `log2 p(n) <= c_upper sqrt(n) / ln 2`.
    pub fn upper(&self, n: u64) -> Result<BoundVerdict> {
        if n == 0 {
            return Err(Error::Domain("the upper bound check needs n >= 1".into()));
        }
        let p = self.p(n)?;
        let params = BoundParams {
            n: Some(n),
            ..Default::default()
        };
        Ok(self.decide(Subject::Upper, params, Relation::LessOrEqual, |ctx| {
            let c = Constants::at(ctx);
            let rhs = (&c.c_upper * &ctx.sqrt_rational(&int(n as i64))).div(ctx.ln2());
            (ctx.log2_uint(p), rhs)
        }))
    }

    /// `ln p(n)/sqrt(n) > sqrt(8) ln 2/(1 + eps)`, compared as
    /// `log2 p(n) > sqrt(8n) / (1 + eps)`.
    pub fn star(&self, n: u64, epsilon: &ExactRational) -> Result<BoundVerdict> {
        if !epsilon.is_positive() {
            return Err(Error::Domain("eps must be positive".into()));
        }
        let p = self.p(n)?;
        let params = BoundParams {
            n: Some(n),
            epsilon: Some(epsilon.clone()),
            ..Default::default()
        };
        let scale = (epsilon + int(1)).recip();
        Ok(self.decide(Subject::Star, params, Relation::Greater, |ctx| {
            let rhs = &ctx.sqrt_rational(&int(8 * n as i64)) * &ctx.rational(&scale);
            (ctx.log2_uint(p), rhs)
        }))
    }

    /// Scans `n` downward from the top of the table to the first `n` where
    /// [`star`](Self::star) does not hold.
    pub fn star_threshold(&self, epsilon: &ExactRational) -> Result<StarThreshold> {
        let top = self.table.max_n() as u64;
        if top == 0 {
            return Err(Error::OutOfRange { index: 1, max_n: 0 });
        }
        let mut last_failure = None;
        for n in (1..=top).rev() {
            if self.star(n, epsilon)?.verdict != Verdict::Holds {
                last_failure = Some(n);
                break;
            }
        }
        Ok(StarThreshold {
            epsilon: epsilon.clone(),
            n: last_failure.map_or(1, |f| f + 1),
            scanned_max: top,
            last_failure,
        })
    }

    /// `ln p(n) / sqrt(n)` for each `n`, flagged against `c_star` and `c_upper`.
    pub fn ratio_rows(&self, ns: &[u64]) -> Result<Vec<RatioRow>> {
        ns.iter().map(|&n| self.ratio_row(n)).collect()
    }

    fn ratio_row(&self, n: u64) -> Result<RatioRow> {
        if n == 0 {
            return Err(Error::Domain("the ratio is defined for n >= 1".into()));
        }
        let p = self.p(n)?;
        let mut row = None;
        for ctx in &self.contexts {
            let c = Constants::at(ctx);
            let ratio = ctx.ln_uint(p).div(&ctx.sqrt_rational(&int(n as i64)));
            let above = Relation::Greater.decide(&ratio, &c.c_star);
            let below = Relation::LessOrEqual.decide(&ratio, &c.c_upper);
            let flag = |v: Option<bool>| v.map_or(Verdict::Indeterminate, Verdict::from_bool);
            row = Some(RatioRow {
                n,
                ratio: pair(&ratio),
                above_c_star: flag(above),
                below_c_upper: flag(below),
            });
            if above.is_some() && below.is_some() {
                break;
            }
        }
        Ok(row.expect("at least one precision level"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count::TableBudget;
    use crate::rational::parse_rational;

    fn table(n: usize) -> CountTable {
        CountTable::build(n, TableBudget::default()).unwrap()
    }

    fn d(s: &str) -> Deviation {
        s.parse().unwrap()
    }

    fn within(iv: &Interval, value: f64, tol: f64) -> bool {
        (iv.lo_f64() - value).abs() < tol && (iv.hi_f64() - value).abs() < tol
    }

    #[test]
    fn constants() {
        let c = Constants::at(&RealContext::new(DEFAULT_PRECISION));
        assert!(within(&c.c_star, 1.9605162869370944, 1e-15));
        assert!(within(&c.c_upper, 2.565099660323728, 1e-15));
        assert!(within(&c.c_explicit, 1.8483924814931874, 1e-15));
        assert!(within(&c.d_opt, 1.7320508075688772, 1e-15));
        assert!(within(&c.window_factor, 0.3849001794597505, 1e-15));
        assert!(c.c_star.certainly_gt(&c.c_explicit));
        assert!(c.c_upper.certainly_gt(&c.c_star));
    }

    #[test]
    fn optimum_of_window_gain() {
        let (d_opt, value) = optimal_d();
        assert!(within(&value, 0.3849, 1e-4));
        assert!(within(&d_opt, 1.7320, 1e-4));
        assert_eq!(window_gain(1.0), 0.0);
        let argmax = grid_argmax(1.01, 10.0, 1e-4);
        assert!((argmax - 1.7320).abs() < 1e-3, "{argmax}");
    }

    #[test]
    fn windows() {
        assert_eq!(window(3, &Deviation::sqrt3()).unwrap(), Some((1, 4)));
        assert_eq!(window(4, &Deviation::sqrt3()).unwrap(), Some((1, 6)));
        // Radius 0.013 around 9/4 contains no integer.
        assert_eq!(window(3, &d("0.01")).unwrap(), None);
        // m = 5 has an integer centre, 5.
        assert_eq!(window(5, &d("0.01")).unwrap(), Some((5, 5)));
        assert!(window(2, &Deviation::sqrt3()).is_err());
    }

    #[test]
    fn window_matches_direct_scan() {
        // Oracle: test each n by squaring |8n - m(m+3)| < sqrt(4 d^2 m^3).
        for m in 3..40u64 {
            for ds in ["1", "3/2", "sqrt(3)", "2", "3", "1/10"] {
                let dev = d(ds);
                let inside = |n: u64| {
                    let diff = int(8 * n as i64 - (m * (m + 3)) as i64);
                    let m_r = int(m as i64);
                    &diff * &diff < dev.square() * &m_r * &m_r * &m_r * int(4)
                };
                let members: Vec<u64> = (0..m * m).filter(|&n| inside(n)).collect();
                let expected = members.first().map(|&lo| (lo, *members.last().unwrap()));
                assert_eq!(window(m, &dev).unwrap(), expected, "m={m} d={ds}");
            }
        }
    }

    #[test]
    fn window_sums() {
        let t = table(2000);
        let checker = BoundChecker::new(&t);
        let v = checker.window_sum(3, &Deviation::sqrt3()).unwrap();
        assert_eq!(v.verdict, Verdict::Holds);
        // 1 + 2 + 3 + 5 = 11 against 16/3.
        assert!((v.lhs_log2.0 - 11f64.log2()).abs() < 1e-12);
        assert!((v.rhs_log2.1 - (16.0f64 / 3.0).log2()).abs() < 1e-12);
        assert_eq!(checker.window_sum(10, &Deviation::sqrt3()).unwrap().verdict, Verdict::Holds);
        let vacuous = checker.window_sum(5, &d("1")).unwrap();
        assert_eq!(vacuous.verdict, Verdict::Holds);
        assert_eq!(vacuous.rhs_log2.0, f64::NEG_INFINITY);
        let small = table(10);
        assert!(matches!(
            BoundChecker::new(&small).window_sum(10, &Deviation::sqrt3()),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn pointwise_examples() {
        let t = table(2000);
        let checker = BoundChecker::new(&t);
        assert_eq!(BoundChecker::pointwise_argument(3, &Deviation::sqrt3()), 4);
        let v = checker.pointwise(3, &Deviation::sqrt3()).unwrap();
        assert_eq!(v.verdict, Verdict::Holds);
        // p(4) = 5 against 32/27.
        assert!((v.rhs_log2.0 - (32.0f64 / 27.0).log2()).abs() < 1e-12);
        assert_eq!(checker.pointwise(20, &Deviation::sqrt3()).unwrap().verdict, Verdict::Holds);
        let vacuous = checker.pointwise(3, &d("1")).unwrap();
        assert_eq!((vacuous.verdict, vacuous.rhs_log2.1), (Verdict::Holds, f64::NEG_INFINITY));
    }

    /// Squared form of the pointwise inequality, decided with exact rationals:
    /// p^2 d^2 m^3 > 4^{m+1} (1 - 1/d^2)^2.
    fn pointwise_exact(t: &CountTable, m: u64, dev: &Deviation) -> bool {
        let mass = dev.chebyshev_mass();
        if !mass.is_positive() {
            return true;
        }
        let p = crate::rational::from_biguint(t.get(BoundChecker::pointwise_argument(m, dev)).unwrap());
        let m_r = int(m as i64);
        let lhs = &p * &p * dev.square() * &m_r * &m_r * &m_r;
        let rhs = BigRational::from_integer(BigInt::one() << (2 * (m as usize + 1))) * &mass * &mass;
        lhs > rhs
    }

    #[test]
    fn pointwise_agrees_with_exact_squares() {
        let t = table(12_000);
        let checker = BoundChecker::new(&t);
        for m in 3..=200 {
            for ds in ["sqrt(3)", "3/2", "2", "1/2"] {
                let dev = d(ds);
                let v = checker.pointwise(m, &dev).unwrap();
                assert_eq!(v.verdict == Verdict::Holds, pointwise_exact(&t, m, &dev), "m={m} d={ds}");
                assert_ne!(v.verdict, Verdict::Indeterminate);
            }
        }
    }

    #[test]
    fn eta_thresholds() {
        // Oracle: plain upward scan from m = 3.
        let scan = |eta: &ExactRational| (3..).find(|&m| eta_condition(m, eta)).unwrap();
        for s in ["1/8", "1", "1000", "1/3", "5/2"] {
            let eta = parse_rational(s).unwrap();
            let found = eta_threshold(&eta).unwrap();
            assert_eq!(found.m, scan(&eta), "eta={s}");
            assert!(found.holds_next_100);
        }
        let eighth = eta_threshold(&ratio(1, 8)).unwrap();
        // Root of m^2 - 816 m + 576 = 0 is about 815.29.
        assert_eq!(eighth.m, 816);
        assert_eq!(eta_threshold(&int(1000)).unwrap().m, 3);
        // eta = 1: x^2 - 2 sqrt(3) x - 3 > 0 beyond x = sqrt(3) + sqrt(6), m > 17.39.
        assert_eq!(eta_threshold(&int(1)).unwrap().m, 18);
        assert!(eta_threshold(&int(0)).is_err());
        assert!(eta_threshold(&ratio(1, 1_000_000_000)).is_err());
    }

    #[test]
    fn dagger_examples() {
        let t = table(2000);
        let checker = BoundChecker::new(&t);
        let eighth = ratio(1, 8);
        let raw = checker.dagger_raw(18, &eighth).unwrap();
        assert_eq!(raw.verdict, Verdict::Holds);
        // p(45) = 89134 against about 2642.
        assert!((raw.lhs_log2.0 - 89134f64.log2()).abs() < 1e-9);
        assert!((raw.rhs_log2.0 - 2642.0f64.log2()).abs() < 1e-3);
        assert!(matches!(
            checker.dagger(18, &eighth),
            Err(Error::PreconditionNotMet { m: 18, threshold: 816 })
        ));
        assert_eq!(checker.dagger_raw(100, &eighth).unwrap().verdict, Verdict::Holds);
        assert_eq!(checker.dagger(3, &int(1000)).unwrap().verdict, Verdict::Holds);
        // p(1) = 1 is below 32/27 at m = 3.
        assert_eq!(checker.dagger_raw(3, &eighth).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn explicit_values() {
        let v2 = explicit_bound_value(2).unwrap();
        assert!(within(&v2, 0.5212, 1e-4));
        assert!((2f64.powf(v2.mid_f64()) - 1.435).abs() < 1e-3);
        let v9 = explicit_bound_value(9).unwrap();
        assert!((2f64.powf(v9.mid_f64()) - 8.71).abs() < 1e-2);
        let big = explicit_bound_value(1_000_000).unwrap();
        assert!(within(&big, 2649.2, 0.1));
        assert!(explicit_bound_value(0).is_err());
    }

    #[test]
    fn explicit_checks() {
        let t = table(3000);
        let checker = BoundChecker::new(&t);
        // At n = 1 the bound (about 1.12) exceeds p(1) = 1.
        assert_eq!(checker.explicit(1).unwrap().verdict, Verdict::Fails);
        assert_eq!(checker.explicit(9).unwrap().verdict, Verdict::Holds);
        let sweep = checker.explicit_sweep(2, 100).unwrap();
        assert_eq!((sweep.holds, sweep.fails, sweep.indeterminate), (99, 0, 0));
        assert!(sweep.all_hold());
        assert!(sweep.min_margin > 0.0);
        assert!(checker.explicit_sweep(1, 10).is_err());
        assert!(checker.explicit_sweep(2, 5000).is_err());
        assert_eq!(checker.control(9).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn explicit_margin_oracle() {
        // Independent f64 evaluation of the margin, far from any rounding issue.
        let t = table(3000);
        let checker = BoundChecker::new(&t);
        for n in [2u64, 10, 77, 500, 3000] {
            let v = checker.explicit(n).unwrap();
            let (lo, _) = crate::count::log2_lower_upper(t.get(n).unwrap()).unwrap();
            let nf = n as f64;
            let bound = 8.0 * nf.sqrt() / 3.0 - 2.5 - 0.75 * nf.log2();
            assert!((v.margin() - (lo - bound)).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn upper_and_ratio() {
        let t = table(10_000);
        let checker = BoundChecker::new(&t);
        for n in [1, 5, 10_000] {
            assert_eq!(checker.upper(n).unwrap().verdict, Verdict::Holds);
        }
        let rows = checker.ratio_rows(&[1, 5]).unwrap();
        assert_eq!(rows[0].ratio, (0.0, 0.0));
        assert_eq!(rows[0].above_c_star, Verdict::Fails);
        assert!((rows[1].ratio.0 - 7f64.ln() / 5f64.sqrt()).abs() < 1e-12);
        assert_eq!(rows[1].below_c_upper, Verdict::Holds);
    }

    #[test]
    fn star_thresholds() {
        let t = table(2000);
        let checker = BoundChecker::new(&t);
        let loose = checker.star_threshold(&ratio(3, 10)).unwrap();
        assert!(loose.n <= 100, "{loose:?}");
        let wide = checker.star_threshold(&int(10)).unwrap();
        assert_eq!((wide.n, wide.last_failure), (2, Some(1)));
        let tight = checker.star_threshold(&ratio(1, 1_000_000)).unwrap();
        assert!(tight.n > loose.n);
        assert!(checker.star(5, &int(0)).is_err());
    }

    #[test]
    fn relations() {
        let ctx = RealContext::new(32);
        let one = ctx.int(1);
        let two = ctx.int(2);
        let third = ctx.rational(&ratio(1, 3));
        assert_eq!(Relation::Greater.decide(&two, &one), Some(true));
        assert_eq!(Relation::Greater.decide(&one, &one), Some(false));
        assert_eq!(Relation::GreaterOrEqual.decide(&one, &one), Some(true));
        assert_eq!(Relation::Less.decide(&one, &two), Some(true));
        assert_eq!(Relation::LessOrEqual.decide(&two, &one), Some(false));
        assert_eq!(Relation::Greater.decide(&third, &third), None);
    }

    #[test]
    fn equal_sides_stay_indeterminate() {
        let t = table(5);
        let checker = BoundChecker::with_precisions(&t, 16, 64);
        let v = checker.decide(Subject::Control, BoundParams::default(), Relation::Greater, |ctx| {
            (ctx.sqrt_rational(&int(2)), ctx.sqrt_rational(&int(2)))
        });
        assert_eq!(v.verdict, Verdict::Indeterminate);
        assert_eq!(v.precision, 64);
    }

    #[test]
    fn params_display() {
        let p = BoundParams {
            m: Some(3),
            d: Some(Deviation::sqrt3()),
            eta: Some(ratio(1, 8)),
            ..Default::default()
        };
        assert_eq!(p.to_string(), "m=3;d=sqrt(3);eta=1/8");
    }
}
