//! Arithmetic backends.
//!
//! Everything that checks an equality (field equivalence, identified-set
//! endpoints, LP bounds) is written once against [`Scalar`] and runs either in
//! exact rationals ([`Rational`]) or in `f64`. Quadrature, Monte Carlo and the
//! Gumbel closed forms are `f64` only.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational.
pub type Rational = BigRational;

/// Relative tolerance used by the floating backend for "equal" checks
/// (simplex sums, weight normalisation).
pub const FLOAT_TOLERANCE: f64 = 1e-12;

/// Ordered field used by the finite-support engines.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + PartialEq
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// `true` for the rational backend.
    const EXACT: bool;

    /// Converts a finite float. Rationals take the exact binary value.
    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    fn to_rational(&self) -> Rational;

    fn from_rational(r: &Rational) -> Self;

    /// Parses a decimal literal (`"0.6"`, `"-1.25e2"`) or a fraction (`"3/5"`).
    /// The rational backend parses exactly.
    fn parse(s: &str) -> Result<Self>;

    /// Canonical text form: terminating decimals where exact, `p/q` otherwise.
    fn repr(&self) -> String;

    /// Equality up to the backend tolerance (exact for rationals).
    fn approx_eq(&self, other: &Self) -> bool;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn from_i64(x: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(x)))
    }

    fn is_finite_value(&self) -> bool {
        true
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).expect("finite float")
    }

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.contains('/') {
            return Ok(ToPrimitive::to_f64(&parse_rational(t)?).unwrap_or(f64::NAN));
        }
        let x = f64::from_str(t).map_err(|_| Error::Parse(format!("not a number: {s:?}")))?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Parse(format!("non-finite number: {s:?}")))
        }
    }

    fn repr(&self) -> String {
        format!("{self}")
    }

    fn approx_eq(&self, other: &Self) -> bool {
        let scale = 1f64.max(f64::abs(*self)).max(f64::abs(*other));
        (self - other).abs() <= FLOAT_TOLERANCE * scale
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_f64(x: f64) -> Option<Self> {
        Rational::from_float(x)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn parse(s: &str) -> Result<Self> {
        parse_rational(s.trim())
    }

    fn repr(&self) -> String {
        rational_repr(self)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("not a decimal or fraction: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], i64::from_str(&s[i + 1..]).map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Ok(if scale >= 0 { Rational::from_integer(numer * pow) } else { Rational::new(numer, pow) })
}

fn rational_repr(r: &Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut d = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while d.is_multiple_of(&two) {
        d /= &two;
        twos += 1;
    }
    while d.is_multiple_of(&five) {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let scaled = r * Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    let n = scaled.to_integer();
    let negative = n < BigInt::zero();
    let digits = n.abs().to_string();
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (i, f) = padded.split_at(padded.len() - places);
    format!("{}{}.{}", if negative { "-" } else { "" }, i, f)
}

/// Largest element under the partial order; `None` for an empty iterator.
pub fn max_of<T: Scalar>(it: impl IntoIterator<Item = T>) -> Option<T> {
    it.into_iter().fold(None, |acc, x| match acc {
        Some(m) if m >= x => Some(m),
        _ => Some(x),
    })
}

pub fn min_of<T: Scalar>(it: impl IntoIterator<Item = T>) -> Option<T> {
    it.into_iter().fold(None, |acc, x| match acc {
        Some(m) if m <= x => Some(m),
        _ => Some(x),
    })
}

pub fn sum_of<T: Scalar>(it: impl IntoIterator<Item = T>) -> T {
    it.into_iter().fold(T::zero(), |a, b| a + b)
}

/// Exact rational from an integer ratio. Panics on a zero denominator.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn from_f64_or_err<T: Scalar>(x: f64) -> Result<T> {
    T::from_f64(x).ok_or_else(|| Error::Invalid(format!("non-finite value {x}")))
}

pub(crate) fn ser_scalar<T: Scalar, S: Serializer>(x: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    x.repr().serialize(s)
}

pub(crate) fn ser_scalars<T: Scalar, S: Serializer>(xs: &[T], s: S) -> std::result::Result<S::Ok, S::Error> {
    xs.iter().map(Scalar::repr).collect::<Vec<_>>().serialize(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_strings_parse_exactly() {
        assert_eq!(Rational::parse("0.6").unwrap(), ratio(3, 5));
        assert_eq!(Rational::parse("-1.25").unwrap(), ratio(-5, 4));
        assert_eq!(Rational::parse("2e-1").unwrap(), ratio(1, 5));
        assert_eq!(Rational::parse("3/9").unwrap(), ratio(1, 3));
        assert_eq!(Rational::parse(".5").unwrap(), ratio(1, 2));
        assert!(Rational::parse("abc").is_err());
        assert!(Rational::parse("1/0").is_err());
        assert!(f64::parse("inf").is_err());
    }

    #[test]
    fn repr_prefers_terminating_decimals() {
        assert_eq!(ratio(3, 5).repr(), "0.6");
        assert_eq!(ratio(-1, 8).repr(), "-0.125");
        assert_eq!(ratio(7, 1).repr(), "7");
        assert_eq!(ratio(1, 3).repr(), "1/3");
        assert_eq!(ratio(21, 20).repr(), "1.05");
    }

    #[test]
    fn float_tolerance_is_relative() {
        assert!(1.0f64.approx_eq(&(1.0 + 1e-14)));
        assert!(!1.0f64.approx_eq(&(1.0 + 1e-9)));
        assert!(!ratio(1, 3).approx_eq(&Rational::from_f64(1.0 / 3.0).unwrap()));
    }
}
