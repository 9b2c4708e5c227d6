//! Exact rational scalars.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// An exact rational number in canonical form (positive denominator, reduced).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Rational(BigRational);

// Cross-multiplication; num-rational compares by continued fractions,
// which is slow on wide operands.
impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        if a.denom() == b.denom() {
            return a.numer().cmp(b.numer());
        }
        let sign = a.numer().sign().cmp(&b.numer().sign());
        if sign != Ordering::Equal {
            return sign;
        }
        (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        let denom = denom.into();
        assert!(!denom.is_zero(), "rational with zero denominator");
        Rational(BigRational::new(numer.into(), denom))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn min(self, other: Self) -> Self {
        Ord::min(self, other)
    }

    pub fn max(self, other: Self) -> Self {
        Ord::max(self, other)
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, exp: i64) -> Self {
        if exp >= 0 {
            Rational(Pow::pow(&self.0, exp as u64))
        } else {
            Rational(Pow::pow(&self.0, exp.unsigned_abs())).recip()
        }
    }

    /// `2^exp` for any integer exponent.
    pub fn pow2(exp: i64) -> Self {
        Rational::from_integer(2).pow(exp)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.numer().to_i64()
        } else {
            None
        }
    }

    /// True when the denominator is a power of two.
    pub fn is_dyadic(&self) -> bool {
        let d = self.denom();
        let (_, mag) = d.clone().into_parts();
        mag.count_ones() == 1
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    /// The `d`-th root of a nonnegative rational when it is exactly rational.
    pub fn exact_root(&self, d: u32) -> Option<Rational> {
        assert!(d >= 1);
        if self.is_negative() {
            return None;
        }
        let n = self.numer().magnitude();
        let m = self.denom().magnitude();
        let rn = n.nth_root(d);
        let rm = m.nth_root(d);
        if Pow::pow(&rn, d) == *n && Pow::pow(&rm, d) == *m {
            Some(Rational::new(BigInt::from(rn), BigInt::from(rm)))
        } else {
            None
        }
    }

    /// `self^exp` exactly, if the result is rational.
    pub fn pow_exact(&self, exp: &Rational) -> Option<Rational> {
        let num = exp.numer().to_i64()?;
        let den = exp.denom().to_u32()?;
        let root = self.exact_root(den)?;
        if root.is_zero() && num < 0 {
            return None;
        }
        Some(root.pow(num))
    }

    /// Rational enclosure `(lo, hi)` of `self^exp` for `self >= 0`, with both
    /// endpoints on the grid `1/2^precision_bits` before the final power.
    /// Exact results collapse to a point.
    pub fn pow_bounds(&self, exp: &Rational, precision_bits: u32) -> (Rational, Rational) {
        assert!(!self.is_negative(), "pow_bounds needs a nonnegative base");
        if let Some(exact) = self.pow_exact(exp) {
            return (exact.clone(), exact);
        }
        if self.is_zero() {
            // 0^q with q > 0; negative q is rejected by pow_exact and has no value
            return (Rational::zero(), Rational::zero());
        }
        let num = exp.numer().to_i64().expect("exponent numerator too large");
        let den = exp
            .denom()
            .to_u32()
            .expect("exponent denominator too large");
        // x^(num/den) = (x^|num|)^(1/den), inverted for negative num
        let base = self.pow(num.abs());
        let (lo, hi) = root_bounds(&base, den, precision_bits);
        if num >= 0 {
            (lo, hi)
        } else if lo.is_zero() {
            self.pow_bounds(exp, precision_bits * 2)
        } else {
            (hi.recip(), lo.recip())
        }
    }

    /// Smallest rational on the `1/2^precision_bits` grid that is `>= self^exp`.
    pub fn pow_upper(&self, exp: &Rational, precision_bits: u32) -> Rational {
        self.pow_bounds(exp, precision_bits).1
    }
}

/// Bounds on the real `d`-th root of a positive rational on the `1/2^bits` grid.
fn root_bounds(x: &Rational, d: u32, bits: u32) -> (Rational, Rational) {
    let scale = BigInt::from(BigUint::one() << (bits as usize));
    let scaled = x.clone() * Rational::from_integer(Pow::pow(&scale, d));
    let floor = scaled.floor();
    let ceil = scaled.ceil();
    let lo_root = floor.magnitude().nth_root(d);
    let mut hi_root = ceil.magnitude().nth_root(d);
    if Pow::pow(&hi_root, d) < *ceil.magnitude() {
        hi_root += 1u32;
    }
    (
        Rational::new(BigInt::from(lo_root), scale.clone()),
        Rational::new(BigInt::from(hi_root), scale),
    )
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = RationalParseError;

    /// Accepts `-12/7`, `3`, `0.25`, `-1.5`. Decimals convert exactly.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(RationalParseError::Empty);
        }
        let malformed = || RationalParseError::Malformed(s.to_string());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        let value = if let Some((n, d)) = body.split_once('/') {
            if !digits(n) || !digits(d) {
                return Err(malformed());
            }
            let d: BigInt = d.parse().map_err(|_| malformed())?;
            if d.is_zero() {
                return Err(RationalParseError::ZeroDenominator(s.to_string()));
            }
            Rational::new(n.parse::<BigInt>().map_err(|_| malformed())?, d)
        } else if let Some((int, frac)) = body.split_once('.') {
            if !digits(int) || !digits(frac) {
                return Err(malformed());
            }
            let whole: BigInt = format!("{int}{frac}").parse().map_err(|_| malformed())?;
            let denom = Pow::pow(BigInt::from(10u32), frac.len());
            Rational::new(whole, denom)
        } else {
            if !digits(body) {
                return Err(malformed());
            }
            Rational::from_integer(body.parse::<BigInt>().map_err(|_| malformed())?)
        };
        Ok(if negative { -value } else { value })
    }
}

macro_rules! from_int {
    ($($t:ty),*) => {$(
        impl From<$t> for Rational {
            fn from(v: $t) -> Self {
                Rational::from_integer(BigInt::from(v))
            }
        }
    )*};
}
from_int!(i32, i64, u32, u64, usize);

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational::from_integer(v)
    }
}

// num-rational re-reduces every product with a full gcd; these kernels keep
// canonical form with cheaper cross-gcds and skip gcds for integers.
fn mul_raw(a: &BigRational, b: &BigRational) -> BigRational {
    if a.is_zero() || b.is_zero() {
        return BigRational::zero();
    }
    if a.denom().is_one() && b.denom().is_one() {
        return BigRational::from_integer(a.numer() * b.numer());
    }
    let g1 = gcd(a.numer(), b.denom());
    let g2 = gcd(b.numer(), a.denom());
    let numer = (a.numer() / &g1) * (b.numer() / &g2);
    let denom = (a.denom() / &g2) * (b.denom() / &g1);
    BigRational::new_raw(numer, denom)
}

// Dyadic denominators are the common case; strip shared twos first.
fn gcd(x: &BigInt, y: &BigInt) -> BigInt {
    if y.is_one() || x.is_one() {
        return BigInt::one();
    }
    let (Some(tx), Some(ty)) = (x.trailing_zeros(), y.trailing_zeros()) else {
        return x.gcd(y);
    };
    let (ox, oy) = (x.magnitude() >> tx, y.magnitude() >> ty);
    if ox.is_one() || oy.is_one() {
        return BigInt::one() << tx.min(ty);
    }
    x.gcd(y)
}

fn div_raw(a: &BigRational, b: &BigRational) -> BigRational {
    assert!(!b.is_zero(), "division by zero");
    mul_raw(a, &b.recip())
}

fn add_raw(a: &BigRational, b: &BigRational) -> BigRational {
    if a.denom().is_one() && b.denom().is_one() {
        return BigRational::from_integer(a.numer() + b.numer());
    }
    a + b
}

fn sub_raw(a: &BigRational, b: &BigRational) -> BigRational {
    if a.denom().is_one() && b.denom().is_one() {
        return BigRational::from_integer(a.numer() - b.numer());
    }
    a - b
}

macro_rules! binop {
    ($tr:ident, $m:ident, $kernel:ident) => {
        impl $tr for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational($kernel(&self.0, &rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &'a Rational) -> Rational {
                Rational($kernel(&self.0, &rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $m(self, rhs: &'a Rational) -> Rational {
                Rational($kernel(&self.0, &rhs.0))
            }
        }
        impl<'a> $tr<Rational> for &'a Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational($kernel(&self.0, &rhs.0))
            }
        }
    };
}
binop!(Add, add, add_raw);
binop!(Sub, sub, sub_raw);
binop!(Mul, mul, mul_raw);
binop!(Div, div, div_raw);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 = add_raw(&self.0, &rhs.0);
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 = add_raw(&self.0, &rhs.0);
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

/// Compare with an integer without allocating a `Rational` at call sites.
impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self.0.is_integer() && *self.0.numer() == BigInt::from(*other)
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.0.cmp(&BigRational::from_integer(BigInt::from(*other))))
    }
}

/// Number of trailing zero bits of `|n|` (0 for zero).
pub(crate) fn trailing_twos(n: &BigInt) -> u64 {
    if n.is_zero() {
        return 0;
    }
    n.magnitude().trailing_zeros().unwrap_or(0)
}
