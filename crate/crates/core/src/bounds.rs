//! Exact arithmetic for the parameter schedule and every bound expression.
//!
//! Nothing here touches floating point. Logarithms are carried as rational
//! intervals `[lo, hi]` that are refined until a comparison is decided.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{Mode, Params};

/// `C(n, r)`, zero when `r < 0`, `n < 0` or `r > n`.
pub fn binomial(n: i64, r: i64) -> BigUint {
    binomial_flagged(n, r).0
}

/// `C(n, r)` plus a flag telling whether the arguments were out of range.
pub fn binomial_flagged(n: i64, r: i64) -> (BigUint, bool) {
    if n < 0 || r < 0 || r > n {
        return (BigUint::zero(), true);
    }
    let r = r.min(n - r) as u64;
    let n = n as u64;
    let mut acc = BigUint::one();
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    (acc, false)
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Sunflower threshold `(p-1)^ell * ell!`.
pub fn erdos_rado_threshold(p: u64, ell: u64) -> BigUint {
    num_traits::pow(BigUint::from(p.saturating_sub(1)), ell as usize) * factorial(ell)
}

/// `|POS2| = C(m,k) [C(m-k,k) + k C(m-k,k-1)]`.
pub fn pos2_count_formula(m: u64, k: u64) -> BigUint {
    let (m, k) = (m as i64, k as i64);
    binomial(m, k) * (binomial(m - k, k) + BigUint::from(k as u64) * binomial(m - k, k - 1))
}

fn ratio(n: impl Into<BigInt>, d: impl Into<BigInt>) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        int(BigInt::one() << e as usize)
    } else {
        ratio(1, BigInt::one() << (-e) as usize)
    }
}

/// A closed rational interval containing some base-2 logarithm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Log2Bounds {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Log2Bounds {
    pub fn exact(v: BigRational) -> Log2Bounds {
        Log2Bounds {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    fn add(&self, other: &Log2Bounds) -> Log2Bounds {
        Log2Bounds {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    fn sub(&self, other: &Log2Bounds) -> Log2Bounds {
        Log2Bounds {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    fn scale(&self, c: &BigRational) -> Log2Bounds {
        if c.is_negative() {
            Log2Bounds {
                lo: &self.hi * c,
                hi: &self.lo * c,
            }
        } else {
            Log2Bounds {
                lo: &self.lo * c,
                hi: &self.hi * c,
            }
        }
    }

    /// `[lo, hi]` printed with `digits` decimals, rounded outward.
    pub fn display(&self, digits: usize) -> String {
        format!(
            "[{},{}]",
            decimal(&self.lo, digits, false),
            decimal(&self.hi, digits, true)
        )
    }
}

/// Decimal rendering of a rational, rounded down or up at `digits` places.
pub fn decimal(r: &BigRational, digits: usize, up: bool) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = r * int(scale.clone());
    let n = if up { scaled.ceil() } else { scaled.floor() }.to_integer();
    let neg = n.is_negative();
    let (q, rem) = n.abs().div_rem(&scale);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{q}")
    } else {
        format!("{sign}{q}.{:0>width$}", rem.to_string(), width = digits)
    }
}

/// Interval for `log2(n)`, width at most `2^(1-prec)`; exact for powers of two.
pub fn log2_uint(n: &BigUint, prec: u32) -> Result<Log2Bounds> {
    if n.is_zero() {
        return Err(Error::Bounds("log2 of zero".into()));
    }
    let e = n.bits() - 1;
    if n.trailing_zeros() == Some(e) {
        return Ok(Log2Bounds::exact(int(e)));
    }
    let w = prec as u64 + 32;
    // x = n / 2^e in fixed point with w fractional bits
    let (mut lo, mut hi) = if w >= e {
        let v = n << (w - e) as usize;
        (v.clone(), v)
    } else {
        let shift = (e - w) as usize;
        let v = n >> shift;
        let exact = (&v << shift) == *n;
        let up = if exact { v.clone() } else { &v + 1u32 };
        (v, up)
    };
    let two = BigUint::one() << (w + 1) as usize;
    let mask_bits = w as usize;
    let mut dlo = BigUint::zero();
    let mut dhi = BigUint::zero();
    for _ in 0..prec {
        lo = (&lo * &lo) >> mask_bits;
        let sq = &hi * &hi;
        hi = &sq >> mask_bits;
        if (&hi << mask_bits) != sq {
            hi += 1u32;
        }
        dlo <<= 1;
        dhi <<= 1;
        if lo >= two {
            lo >>= 1;
            dlo += 1u32;
        }
        if hi >= two {
            let odd = hi.is_odd();
            hi >>= 1;
            if odd {
                hi += 1u32;
            }
            dhi += 1u32;
        }
    }
    let unit = pow2(-(prec as i64));
    let base = int(e);
    Ok(Log2Bounds {
        lo: &base + int(BigInt::from(dlo)) * &unit,
        hi: &base + int(BigInt::from(dhi) + 2) * &unit,
    })
}

/// Interval for `log2(a/b)` with `a, b > 0`.
pub fn log2_rational(r: &BigRational, prec: u32) -> Result<Log2Bounds> {
    if !r.is_positive() {
        return Err(Error::Bounds(format!("log2 of non-positive value {r}")));
    }
    let a = r.numer().to_biguint().expect("positive");
    let b = r.denom().to_biguint().expect("positive");
    Ok(log2_uint(&a, prec)?.sub(&log2_uint(&b, prec)?))
}

/// Rational bounds on `e` with gap below `2^-(prec+8)`.
fn e_bounds(prec: u32) -> (BigRational, BigRational) {
    let target = pow2(-(prec as i64) - 8);
    let mut sum = int(1);
    let mut fact = BigInt::one();
    let mut i = 0u64;
    loop {
        i += 1;
        fact *= i;
        sum += ratio(1, fact.clone());
        let tail = ratio(1, &fact * BigInt::from(i));
        if tail < target {
            return (sum.clone(), sum + tail);
        }
    }
}

/// Bounds on `atan(1/q)` from the alternating series.
fn atan_inv_bounds(q: u64, prec: u32) -> (BigRational, BigRational) {
    let target = pow2(-(prec as i64) - 8);
    let q2 = BigInt::from(q) * q;
    let mut power = BigInt::from(q);
    let mut sum = BigRational::zero();
    let mut i = 0u64;
    loop {
        let term = ratio(1, &power * BigInt::from(2 * i + 1));
        if i.is_multiple_of(2) {
            sum += &term;
        } else {
            sum -= &term;
        }
        let next = ratio(1, &power * &q2 * BigInt::from(2 * i + 3));
        if next < target {
            // the next term has the opposite sign of the last one added
            return if i.is_multiple_of(2) {
                (&sum - &next, sum)
            } else {
                (sum.clone(), sum + next)
            };
        }
        power *= &q2;
        i += 1;
    }
}

fn pi_bounds(prec: u32) -> (BigRational, BigRational) {
    let (a_lo, a_hi) = atan_inv_bounds(5, prec + 6);
    let (b_lo, b_hi) = atan_inv_bounds(239, prec + 6);
    let (sixteen, four) = (int(16), int(4));
    (
        &sixteen * &a_lo - &four * &b_hi,
        &sixteen * &a_hi - &four * &b_lo,
    )
}

fn log2_e(prec: u32) -> Result<Log2Bounds> {
    let (lo, hi) = e_bounds(prec + 4);
    Ok(Log2Bounds {
        lo: log2_rational(&lo, prec + 4)?.lo,
        hi: log2_rational(&hi, prec + 4)?.hi,
    })
}

/// Largest `n` whose factorial is multiplied out exactly.
pub const EXACT_FACTORIAL_LIMIT: u64 = 20_000;

/// Interval for `log2(n!)`; Stirling with explicit remainder bounds for large `n`.
pub fn log2_factorial(n: &BigUint, prec: u32) -> Result<Log2Bounds> {
    if let Some(small) = n.to_u64().filter(|&v| v <= EXACT_FACTORIAL_LIMIT) {
        return log2_uint(&factorial(small), prec);
    }
    // ln n! = n ln n - n + ln(2 pi n)/2 + r,  1/(12n+1) < r < 1/(12n)
    let p = prec + 16;
    let nr = int(BigInt::from(n.clone()));
    let log_n = log2_uint(n, p)?;
    let log_e = log2_e(p)?;
    let (pi_lo, pi_hi) = pi_bounds(p);
    let log_2pi = Log2Bounds {
        lo: log2_rational(&pi_lo, p)?.lo + int(1),
        hi: log2_rational(&pi_hi, p)?.hi + int(1),
    };
    let half = ratio(1, 2);
    let r = Log2Bounds {
        lo: ratio(1, 12 * BigInt::from(n.clone()) + 1),
        hi: ratio(1, 12 * BigInt::from(n.clone())),
    };
    let r_log = Log2Bounds {
        lo: &r.lo * &log_e.lo,
        hi: &r.hi * &log_e.hi,
    };
    Ok(log_n
        .scale(&nr)
        .sub(&log_e.scale(&nr))
        .add(&log_2pi.add(&log_n).scale(&half))
        .add(&r_log))
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Atom {
    Int(BigUint),
    Factorial(BigUint),
}

/// A rational-weighted sum of base-2 logarithms plus a rational constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogExpr {
    constant: BigRational,
    terms: Vec<(BigRational, Atom)>,
}

impl LogExpr {
    pub fn constant(c: BigRational) -> LogExpr {
        LogExpr {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn zero() -> LogExpr {
        LogExpr::constant(BigRational::zero())
    }

    /// `coef * log2(n)`.
    pub fn log(coef: BigRational, n: BigUint) -> LogExpr {
        LogExpr {
            constant: BigRational::zero(),
            terms: vec![(coef, Atom::Int(n))],
        }
    }

    /// `coef * log2(n!)`.
    pub fn log_factorial(coef: BigRational, n: BigUint) -> LogExpr {
        LogExpr {
            constant: BigRational::zero(),
            terms: vec![(coef, Atom::Factorial(n))],
        }
    }

    pub fn plus(mut self, other: LogExpr) -> LogExpr {
        self.constant += other.constant;
        self.terms.extend(other.terms);
        self
    }

    pub fn minus(self, other: LogExpr) -> LogExpr {
        self.plus(other.scaled(&int(-1)))
    }

    pub fn scaled(mut self, c: &BigRational) -> LogExpr {
        self.constant *= c;
        for (coef, _) in &mut self.terms {
            *coef *= c;
        }
        self
    }

    pub fn bounds(&self, prec: u32) -> Result<Log2Bounds> {
        let mut acc = Log2Bounds::exact(self.constant.clone());
        for (coef, atom) in &self.terms {
            if coef.is_zero() {
                continue;
            }
            let b = match atom {
                Atom::Int(n) => log2_uint(n, prec)?,
                Atom::Factorial(n) => log2_factorial(n, prec)?,
            };
            acc = acc.add(&b.scale(coef));
        }
        Ok(acc)
    }
}

/// Outcome of comparing two logarithmic quantities.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    Less,
    Equal,
    Greater,
    Undecided,
}

impl From<Ordering> for Comparison {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Comparison::Less,
            Ordering::Equal => Comparison::Equal,
            Ordering::Greater => Comparison::Greater,
        }
    }
}

/// Precisions tried in turn when deciding a comparison.
pub const PRECISIONS: [u32; 8] = [64, 128, 256, 512, 1024, 2048, 4096, 8192];

/// Compares `2^lhs` with `2^rhs`, refining until decided; returns the last
/// interval pair used.
pub fn compare(lhs: &LogExpr, rhs: &LogExpr) -> Result<(Comparison, Log2Bounds, Log2Bounds)> {
    let mut last = None;
    for prec in PRECISIONS {
        let l = lhs.bounds(prec)?;
        let r = rhs.bounds(prec)?;
        let d = l.sub(&r);
        if d.lo.is_positive() {
            return Ok((Comparison::Greater, l, r));
        }
        if d.hi.is_negative() {
            return Ok((Comparison::Less, l, r));
        }
        if d.is_exact() && d.lo.is_zero() {
            return Ok((Comparison::Equal, l, r));
        }
        last = Some((l, r));
    }
    let (l, r) = last.expect("at least one precision");
    Ok((Comparison::Undecided, l, r))
}

/// The boxed schedule `ell = m^(1/8)`, `k = m^(1/4)`, `p = ell log2 m`,
/// `L = (p-1)^ell ell!`, for `m = 2^t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub log2m: u64,
    pub m: BigUint,
    pub ell: BigUint,
    pub k: BigUint,
    pub p: BigUint,
    /// Materialized only when small enough to be worth holding.
    pub threshold: Option<BigUint>,
    pub chain_holds: bool,
}

/// Largest `ell * log2(p)` for which `L` is multiplied out.
const L_MATERIALIZE_BITS: u64 = 1 << 22;

impl Schedule {
    /// `log2 L` as an expression.
    pub fn log2_l(&self) -> LogExpr {
        LogExpr::log(int(BigInt::from(self.ell.clone())), &self.p - 1u32)
            .plus(LogExpr::log_factorial(int(1), self.ell.clone()))
    }

    pub fn log2_m(&self) -> LogExpr {
        LogExpr::constant(int(self.log2m))
    }
}

/// Schedule for `m = 2^log2m`; `log2m` must be a multiple of 8.
pub fn schedule(log2m: u64, mode: Mode) -> Result<Schedule> {
    if log2m == 0 || !log2m.is_multiple_of(8) {
        return Err(Error::InvalidParams(format!(
            "m = 2^{log2m} is not a perfect 8th power with integral p; log2 m must be a positive multiple of 8"
        )));
    }
    let ell = BigUint::one() << (log2m / 8) as usize;
    let k = BigUint::one() << (log2m / 4) as usize;
    let m = BigUint::one() << log2m as usize;
    let p = &ell * log2m;
    let chain_holds = BigUint::from(2u32) < ell && ell < p && p < k && k < m;
    if mode == Mode::Strict && !chain_holds {
        return Err(Error::InvalidParams(format!(
            "strict chain 2 < ell < p < k < m fails: ell={ell} p={p} k={k} m=2^{log2m}"
        )));
    }
    let l_bits = ell.to_u64().map(|e| e.saturating_mul(p.bits()));
    let threshold = match l_bits {
        Some(b) if b <= L_MATERIALIZE_BITS => {
            let e = ell.to_u64().expect("checked");
            Some(num_traits::pow(&p - 1u32, e as usize) * factorial(e))
        }
        _ => None,
    };
    Ok(Schedule {
        log2m,
        m,
        ell,
        k,
        p,
        threshold,
        chain_holds,
    })
}

/// Schedule for an explicit `m`; `m` must be `2^(8t)`.
pub fn schedule_of(m: &BigUint, mode: Mode) -> Result<Schedule> {
    let ell = m.nth_root(8);
    if num_traits::pow(ell.clone(), 8) != *m {
        return Err(Error::InvalidParams(format!(
            "m = {m} is not a perfect 8th power"
        )));
    }
    let t = m.bits() - 1;
    if m.trailing_zeros() != Some(t) {
        return Err(Error::InvalidParams(format!(
            "m = {m} is an 8th power but log2 m is irrational, so p = ell log2 m is not an integer"
        )));
    }
    schedule(t, mode)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = ">")]
    Greater,
}

#[derive(Clone, Debug)]
pub struct InequalityResult {
    pub name: &'static str,
    pub relation: Relation,
    pub lhs: Log2Bounds,
    pub rhs: Log2Bounds,
    pub comparison: Comparison,
}

impl InequalityResult {
    pub fn holds(&self) -> bool {
        matches!(
            (self.relation, self.comparison),
            (Relation::Less, Comparison::Less) | (Relation::Greater, Comparison::Greater)
        )
    }

    pub fn verdict(&self) -> &'static str {
        if self.holds() {
            "PASS"
        } else if self.comparison == Comparison::Undecided {
            "UNDECIDED"
        } else {
            "FAIL"
        }
    }
}

impl fmt::Display for InequalityResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = lhs_log2_bounds {} rhs_log2_bounds {} {}",
            self.name,
            self.lhs.display(4),
            self.rhs.display(4),
            self.verdict()
        )
    }
}

#[derive(Clone, Debug)]
pub struct AppendixBReport {
    pub log2m: u64,
    pub epsilon: BigRational,
    pub results: Vec<InequalityResult>,
}

impl AppendixBReport {
    pub fn all_hold(&self) -> bool {
        self.results.iter().all(InequalityResult::holds)
    }

    pub fn failing(&self) -> Vec<&'static str> {
        self.results
            .iter()
            .filter(|r| !r.holds())
            .map(|r| r.name)
            .collect()
    }
}

/// The seven asymptotic inequalities for `m = 2^log2m`, each decided exactly.
pub fn check_appendix_b(log2m: u64, epsilon: &BigRational) -> Result<AppendixBReport> {
    if !epsilon.is_positive() {
        return Err(Error::InvalidParams(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let s = schedule(log2m, Mode::Relaxed)?;
    let ell = int(BigInt::from(s.ell.clone()));
    let log_m = s.log2_m();
    let log_l = s.log2_l();
    // log2 of ((m - ell) / k)^ell
    let ratio_term =
        LogExpr::log(ell.clone(), &s.m - &s.ell).minus(LogExpr::log(ell.clone(), s.k.clone()));
    let m_pow = |c: BigRational| log_m.clone().scaled(&(c * &ell));
    let eps = epsilon.clone();

    let cases: Vec<(&'static str, Relation, LogExpr, LogExpr)> = vec![
        (
            "ell_factorial",
            Relation::Less,
            LogExpr::log_factorial(int(1), s.ell.clone()),
            m_pow(ratio(1, 8)),
        ),
        (
            "p_minus_1_pow_ell",
            Relation::Less,
            LogExpr::log(ell.clone(), &s.p - 1u32),
            m_pow(ratio(1, 8) + &eps),
        ),
        (
            "L",
            Relation::Less,
            log_l.clone(),
            m_pow(ratio(1, 4) + &eps),
        ),
        (
            "L_squared",
            Relation::Less,
            log_l.clone().scaled(&int(2)),
            m_pow(ratio(1, 2) + int(2) * &eps),
        ),
        (
            "ratio_pow_ell",
            Relation::Greater,
            ratio_term.clone(),
            m_pow(ratio(2, 3)),
        ),
        (
            "ratio_pow_ell_over_L_squared",
            Relation::Greater,
            ratio_term.minus(log_l.clone().scaled(&int(2))),
            m_pow(ratio(1, 7)),
        ),
        (
            "quarter_two_pow_p_over_L_squared",
            Relation::Greater,
            LogExpr::constant(int(BigInt::from(s.p.clone())) - int(2)).minus(log_l.scaled(&int(2))),
            m_pow(ratio(1, 3)),
        ),
    ];
    let mut results = Vec::with_capacity(cases.len());
    for (name, relation, lhs, rhs) in cases {
        let (comparison, l, r) = compare(&lhs, &rhs)?;
        results.push(InequalityResult {
            name,
            relation,
            lhs: l,
            rhs: r,
            comparison,
        });
    }
    Ok(AppendixBReport {
        log2m,
        epsilon: epsilon.clone(),
        results,
    })
}

/// Smallest multiple of 8 up to `max_log2m` at which all seven inequalities hold.
pub fn smallest_passing_log2m(epsilon: &BigRational, max_log2m: u64) -> Result<Option<u64>> {
    let mut t = 8;
    while t <= max_log2m {
        if check_appendix_b(t, epsilon)?.all_hold() {
            return Ok(Some(t));
        }
        t += 8;
    }
    Ok(None)
}

/// The lower bound `m^(ell/7)` for the circuit size of a CLIQ2 solver.
#[derive(Clone, Debug)]
pub struct Theorem13Threshold {
    pub m: BigUint,
    pub ell: BigUint,
    log2: LogExpr,
}

/// Largest `ell * bits(m)` for the exact `N^7 >= m^ell` fallback.
const EXACT_FALLBACK_BITS: u64 = 1 << 26;

impl Theorem13Threshold {
    pub fn new(m: BigUint, ell: BigUint) -> Result<Theorem13Threshold> {
        if m.is_zero() {
            return Err(Error::InvalidParams("m must be positive".into()));
        }
        let log2 = LogExpr::log(ratio(BigInt::from(ell.clone()), 7), m.clone());
        Ok(Theorem13Threshold { m, ell, log2 })
    }

    pub fn of_schedule(s: &Schedule) -> Theorem13Threshold {
        Theorem13Threshold::new(s.m.clone(), s.ell.clone()).expect("schedule m is positive")
    }

    pub fn log2_bounds(&self, prec: u32) -> Result<Log2Bounds> {
        self.log2.bounds(prec)
    }

    /// Exact decision of `n >= m^(ell/7)`.
    pub fn is_met(&self, n: &BigUint) -> Result<bool> {
        if n.is_zero() {
            return Ok(false);
        }
        let (cmp, _, _) = compare(&LogExpr::log(int(1), n.clone()), &self.log2)?;
        match cmp {
            Comparison::Greater | Comparison::Equal => Ok(true),
            Comparison::Less => Ok(false),
            Comparison::Undecided => {
                let e = self
                    .ell
                    .to_u64()
                    .filter(|e| e.saturating_mul(self.m.bits()) <= EXACT_FALLBACK_BITS);
                match e {
                    Some(e) => Ok(num_traits::pow(n.clone(), 7)
                        >= num_traits::pow(self.m.clone(), e as usize)),
                    None => Err(Error::Bounds(
                        "threshold comparison undecided at maximum precision".into(),
                    )),
                }
            }
        }
    }
}

/// Exact right-hand sides of the deviation bounds for one parameter set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundExpressions {
    /// `(k-1)^(2m)`, the number of coloring pairs.
    pub coloring_pairs: BigUint,
    pub pos2_count: BigUint,
    /// `L 2^(2-p) (k-1)^(2m)`.
    pub join_neg: BigRational,
    /// `L^2 C(m-ell-1, k-ell-1) [C(m-k,k) + k C(m-k,k-1)]`.
    pub meet_pos: BigUint,
    pub meet_pos_degenerate: bool,
    /// `L^2 2^(1-p) (k-1)^(2m)`.
    pub meet_neg: BigRational,
    /// `(k-1)^(2m) / 4`.
    pub quarter_pairs: BigRational,
}

pub fn bound_expressions(params: &Params) -> BoundExpressions {
    let (m, k, ell, p) = (
        params.m as i64,
        params.k as i64,
        params.ell as i64,
        params.p as i64,
    );
    let coloring_pairs = num_traits::pow(BigUint::from((k - 1).max(0) as u64), 2 * m as usize);
    let l = int(BigInt::from(params.threshold.clone()));
    let cp = int(BigInt::from(coloring_pairs.clone()));
    let (c1, d1) = binomial_flagged(m - ell - 1, k - ell - 1);
    let (c2, d2) = binomial_flagged(m - k, k);
    let (c3, d3) = binomial_flagged(m - k, k - 1);
    let l2 = &params.threshold * &params.threshold;
    BoundExpressions {
        pos2_count: pos2_count_formula(m as u64, k as u64),
        join_neg: &l * pow2(2 - p) * &cp,
        meet_pos: &l2 * c1 * (c2 + BigUint::from(k as u64) * c3),
        meet_pos_degenerate: d1 || d2 || d3,
        meet_neg: int(BigInt::from(l2)) * pow2(1 - p) * &cp,
        quarter_pairs: cp / int(4),
        coloring_pairs,
    }
}

/// Renders a rational as an integer when it is one, `a/b` otherwise.
pub fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `a`, `a/b` or a decimal like `0.01` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidParams(format!("cannot read `{s}` as a rational"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    if let Some((w, f)) = s.split_once('.') {
        if f.is_empty() || !f.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = w.starts_with('-');
        let w: BigInt = if w.is_empty() || w == "-" {
            BigInt::zero()
        } else {
            w.parse().map_err(|_| bad())?
        };
        let frac: BigInt = f.parse().map_err(|_| bad())?;
        let den = BigInt::from(10u32).pow(f.len() as u32);
        let mag = w.abs() * &den + frac;
        return Ok(BigRational::new(if neg { -mag } else { mag }, den));
    }
    Ok(int(s.parse::<BigInt>().map_err(|_| bad())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), big(10));
        assert_eq!(binomial(10, 0), big(1));
        assert_eq!(binomial(2, 3), big(0));
        assert_eq!(binomial_flagged(2, -1), (big(0), true));
        assert_eq!(
            binomial(60, 30),
            "118264581564861424".parse::<BigUint>().unwrap()
        );
    }

    #[test]
    fn pos2_formula_values() {
        assert_eq!(pos2_count_formula(4, 3), big(0));
        assert_eq!(pos2_count_formula(5, 3), big(30));
        assert_eq!(pos2_count_formula(6, 3), big(200));
    }

    #[test]
    fn threshold_values() {
        assert_eq!(erdos_rado_threshold(4, 3), big(162));
        assert_eq!(erdos_rado_threshold(3, 2), big(8));
        assert_eq!(erdos_rado_threshold(3, 3), big(48));
    }

    #[test]
    fn log2_intervals_contain_truth() {
        // 3^20 = 3486784401, log2 = 31.699250014423...
        let b = log2_uint(&big(3486784401), 64).unwrap();
        assert!(b.lo <= ratio(31699250014424u64, 1_000_000_000_000u64));
        assert!(b.hi >= ratio(31699250014423u64, 1_000_000_000_000u64));
        assert!(&b.hi - &b.lo <= pow2(-63));
        assert_eq!(
            log2_uint(&big(1024), 8).unwrap(),
            Log2Bounds::exact(int(10))
        );
        assert!(log2_uint(&big(0), 8).is_err());
        assert_eq!(log2_uint(&big(1), 8).unwrap(), Log2Bounds::exact(int(0)));
    }

    #[test]
    fn log2_intervals_nest_against_integer_powers() {
        // lo <= log2 n <= hi  iff  2^lo <= n <= 2^hi; test via n^q vs 2^p for rationals p/q
        for n in [3u64, 5, 7, 1000, 123456789] {
            let b = log2_uint(&big(n), 8).unwrap();
            for bound in [&b.lo, &b.hi] {
                let q = bound.denom().to_biguint().unwrap();
                let p = bound.numer().to_biguint().unwrap();
                let lhs = num_traits::pow(big(n), q.to_usize().unwrap());
                let rhs = BigUint::one() << p.to_usize().unwrap();
                if std::ptr::eq(bound, &b.lo) {
                    assert!(rhs <= lhs);
                } else {
                    assert!(rhs >= lhs);
                }
            }
        }
    }

    #[test]
    fn stirling_agrees_with_exact_product() {
        let n = big(EXACT_FACTORIAL_LIMIT + 1);
        let exact = log2_uint(&factorial(EXACT_FACTORIAL_LIMIT + 1), 64).unwrap();
        // force the Stirling route through the public path
        let st = log2_factorial(&n, 64).unwrap();
        assert!(st.lo <= exact.hi && exact.lo <= st.hi);
        assert!(&st.hi - &st.lo < ratio(1, 1_000_000));
    }

    #[test]
    fn constants_bracket_truth() {
        let (lo, hi) = pi_bounds(64);
        assert!(lo < ratio(3141592653589793239u64, 1_000_000_000_000_000_000u64));
        assert!(hi > ratio(3141592653589793238u64, 1_000_000_000_000_000_000u64));
        let (lo, hi) = e_bounds(64);
        assert!(lo < ratio(2718281828459045236u64, 1_000_000_000_000_000_000u64));
        assert!(hi > ratio(2718281828459045235u64, 1_000_000_000_000_000_000u64));
    }

    #[test]
    fn schedule_values() {
        let s = schedule(48, Mode::Relaxed).unwrap();
        assert_eq!(s.ell, big(64));
        assert_eq!(s.k, big(4096));
        assert_eq!(s.p, big(3072));
        assert!(s.chain_holds);
        assert_eq!(
            s.threshold.clone().unwrap(),
            num_traits::pow(big(3071), 64) * factorial(64)
        );

        let s = schedule(24, Mode::Relaxed).unwrap();
        assert_eq!(
            (s.ell.clone(), s.k.clone(), s.p.clone()),
            (big(8), big(64), big(192))
        );
        assert!(!s.chain_holds);
        assert!(schedule(24, Mode::Strict).is_err());

        assert!(schedule_of(&big(100), Mode::Relaxed).is_err());
        assert!(schedule_of(&big(6561), Mode::Relaxed).is_err());
        assert_eq!(schedule_of(&big(1 << 48), Mode::Relaxed).unwrap().log2m, 48);
    }

    #[test]
    fn appendix_b_first_inequality_at_2_48() {
        let r = check_appendix_b(48, &ratio(1, 100)).unwrap();
        assert_eq!(r.results.len(), 7);
        let first = &r.results[0];
        assert!(first.holds());
        // log2(64!) is about 296
        assert!(first.lhs.lo > int(295) && first.lhs.hi < int(297));
        assert_eq!(first.rhs, Log2Bounds::exact(int(384)));
    }

    #[test]
    fn appendix_b_fails_somewhere_at_2_8() {
        let r = check_appendix_b(8, &ratio(1, 100)).unwrap();
        assert!(!r.all_hold());
    }

    #[test]
    fn theorem13_threshold_at_2_56() {
        let s = schedule(56, Mode::Relaxed).unwrap();
        assert_eq!(s.ell, big(128));
        let t = Theorem13Threshold::of_schedule(&s);
        assert_eq!(t.log2_bounds(64).unwrap(), Log2Bounds::exact(int(1024)));
        assert!(t.is_met(&(BigUint::one() << 1024usize)).unwrap());
        assert!(!t.is_met(&(BigUint::one() << 1023usize)).unwrap());
        assert!(!t.is_met(&big(1)).unwrap());
        assert!(!t.is_met(&big(0)).unwrap());
        let near = (BigUint::one() << 1024usize) - 1u32;
        assert!(!t.is_met(&near).unwrap());
    }

    #[test]
    fn theorem13_threshold_monotone_in_m() {
        let mut prev: Option<Log2Bounds> = None;
        for t in [8u64, 16, 24, 32, 40, 48, 56, 64] {
            let b = Theorem13Threshold::of_schedule(&schedule(t, Mode::Relaxed).unwrap())
                .log2_bounds(64)
                .unwrap();
            if let Some(p) = prev {
                assert!(p.hi < b.lo);
            }
            prev = Some(b);
        }
    }

    #[test]
    fn bound_expression_values() {
        let params = Params::new(5, 3, 3, 4).unwrap();
        let b = bound_expressions(&params);
        assert_eq!(b.coloring_pairs, big(1024));
        assert_eq!(b.join_neg, int(41472));
        assert_eq!(b.quarter_pairs, int(256));
        assert_eq!(b.pos2_count, big(30));

        let params = Params::new(6, 3, 3, 4).unwrap();
        let b = bound_expressions(&params);
        assert_eq!(b.meet_pos, big(0));
        assert!(b.meet_pos_degenerate);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/100").unwrap(), ratio(1, 100));
        assert_eq!(parse_rational("0.01").unwrap(), ratio(1, 100));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(decimal(&ratio(-1, 3), 3, false), "-0.334");
        assert_eq!(decimal(&ratio(1, 3), 3, true), "0.334");
        assert_eq!(fmt_rational(&ratio(6, 4)), "3/2");
    }
}
