//! Reduced arbitrary-precision rationals with bit-complexity accounting.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Number of bits of a reduced fraction (numerator plus denominator).
pub type BitComplexity = u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RationalError {
    #[error("sum bound violated: {0}")]
    AssertionViolation(String),
    #[error("checked_sum needs at least two terms, got {0}")]
    TooFewTerms(usize),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

/// Exact fraction kept in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

/// `B_z`: bit length of `|z|`, with `B_0 = 1`.
pub fn integer_bits(z: &BigInt) -> u64 {
    if z.is_zero() {
        1
    } else {
        z.bits()
    }
}

impl Rational {
    /// Returns `None` when `denom` is zero.
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Option<Self> {
        let d = denom.into();
        if d.is_zero() {
            return None;
        }
        Some(Rational(BigRational::new(numer.into(), d)))
    }

    /// Small-integer constructor; panics on a zero denominator.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Self::new(numer, denom).expect("zero denominator")
    }

    pub fn integer(z: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(z.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// `2^exp` for any signed exponent.
    pub fn pow2(exp: i64) -> Self {
        let p = BigInt::one() << exp.unsigned_abs();
        if exp >= 0 {
            Self::integer(p)
        } else {
            Rational(BigRational::new_raw(BigInt::one(), p))
        }
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn bit_complexity(&self) -> BitComplexity {
        integer_bits(self.numer()) + integer_bits(self.denom())
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

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn floor(&self) -> BigInt {
        self.numer().div_floor(self.denom())
    }

    /// Smallest `k` with `2^k >= self`; `self` must be positive.
    pub fn ceil_log2(&self) -> i64 {
        assert!(self.is_positive(), "ceil_log2 of non-positive value");
        let (n, d) = (self.numer(), self.denom());
        let mut k = n.bits() as i64 - d.bits() as i64;
        // 2^(k-1) < n/d < 2^(k+1) at this point; settle the boundary exactly.
        loop {
            if Self::pow2(k) >= *self {
                if Self::pow2(k - 1) >= *self {
                    k -= 1;
                    continue;
                }
                return k;
            }
            k += 1;
        }
    }

    pub fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self.0).unwrap_or(f64::NAN)
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl From<i64> for Rational {
    fn from(z: i64) -> Self {
        Self::integer(z)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `a`, `a/b`, and finite decimals such as `0.125` (read exactly).
impl FromStr for Rational {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RationalError::Parse(s.to_string());
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            return Rational::new(n, d).ok_or_else(bad);
        }
        if let Some((whole, frac)) = t.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = whole.starts_with('-');
            let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
            let mut n: BigInt = digits.parse().map_err(|_| bad())?;
            if negative {
                n = -n;
            }
            let d = num_traits::pow(BigInt::from(10), frac.len());
            return Rational::new(n, d).ok_or_else(bad);
        }
        let n: BigInt = t.parse().map_err(|_| bad())?;
        Ok(Rational::integer(n))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

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

/// Exact sum of `qs`, checking the bounds for sums of `B`-bit rationals:
/// the result has at most `4B` bits for two terms and `3mB` bits for `m > 2`,
/// and a nonzero result is at least `2^{-Bm}` in magnitude.
pub fn checked_sum(qs: &[Rational], bound: BitComplexity) -> Result<Rational, RationalError> {
    let m = qs.len();
    if m < 2 {
        return Err(RationalError::TooFewTerms(m));
    }
    if let Some(q) = qs.iter().find(|q| q.bit_complexity() > bound) {
        return Err(RationalError::AssertionViolation(format!(
            "term {q} has {} bits, above B = {bound}",
            q.bit_complexity()
        )));
    }
    let sum: Rational = qs.iter().sum();
    let limit = if m == 2 { 4 * bound } else { 3 * m as u64 * bound };
    if sum.bit_complexity() > limit {
        return Err(RationalError::AssertionViolation(format!(
            "sum {sum} has {} bits, above {limit}",
            sum.bit_complexity()
        )));
    }
    if !sum.is_zero() && sum.abs() < Rational::pow2(-((bound * m as u64) as i64)) {
        return Err(RationalError::AssertionViolation(format!("nonzero sum {sum} below 2^-{}", bound * m as u64)));
    }
    Ok(sum)
}
