//! Scalar backends for exact and floating-point computation.
//!
//! Every quantity in this crate — distances, vector coefficients, norms,
//! matrix entries — is generic over a [`Scalar`]. Two backends are offered
//! through the instance file format:
//!
//! * **exact**: [`num::BigRational`], unbounded rational arithmetic. Every
//!   comparison is a genuine equality and every certified identity holds on
//!   the nose.
//! * **float**: [`f64`] with a relative tolerance [`FLOAT_TOL`]. Two values
//!   are considered equal when `|a - b| <= FLOAT_TOL * max(1, |a|, |b|)`.
//!
//! A third backend, `Ratio<i128>`, is exact but fixed-width; it exists for
//! hot inner loops on small data (oracles, vertex enumeration) where
//! heap-allocated rationals would dominate the runtime. Overflow aborts
//! loudly rather than wrapping, so a result that comes back is trustworthy.
//!
//! One computation sticks to one backend throughout; nothing in this crate
//! mixes them silently.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::Ratio;
use num::{BigRational, One, Signed, Zero};
use serde_json::Value;

/// Relative tolerance used by the float backend.
///
/// `a` and `b` are treated as equal when `|a - b| <= FLOAT_TOL * max(1, |a|, |b|)`,
/// i.e. absolutely for small values and relatively for large ones.
pub const FLOAT_TOL: f64 = 1e-9;

/// Error produced when a string cannot be read as a scalar.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {text:?} as a number: {reason}")]
pub struct ParseScalarError {
    pub text: String,
    pub reason: String,
}

impl ParseScalarError {
    fn new(text: &str, reason: impl Into<String>) -> Self {
        ParseScalarError { text: text.to_string(), reason: reason.into() }
    }
}

/// The arithmetic interface shared by all backends.
///
/// Beyond field operations this captures the two things the library actually
/// needs from numbers: a total order (`cmp_scalar`) for optimization and
/// pivoting, and a backend-appropriate equality (`eq_scalar`) for verifying
/// identities — exact for rationals, tolerance-based for floats.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// Whether comparisons on this backend are exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;

    /// The fraction `num/den`. Panics if `den == 0`.
    fn ratio(num: i64, den: i64) -> Self;

    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;

    /// Backend equality: exact comparison for rational backends, relative
    /// tolerance for floats.
    fn eq_scalar(&self, other: &Self) -> bool;

    /// Total order on raw values (ignores the tolerance). Panics on NaN,
    /// which no code path produces.
    fn cmp_scalar(&self, other: &Self) -> Ordering;

    /// Lossy conversion for display and rough sanity checks.
    fn to_f64_lossy(&self) -> f64;

    /// Parse `"p/q"`, an integer, or a (possibly scientific) decimal.
    fn parse(text: &str) -> Result<Self, ParseScalarError>;

    /// JSON representation: a `"p/q"` string for exact backends, a plain
    /// number for floats.
    fn to_json(&self) -> Value;

    /// The tolerance this backend certifies identities up to, if any.
    fn tolerance() -> Option<f64>;

    /// Square root, where the backend supports one. Exact backends return
    /// `None`: square roots of rationals are generally irrational.
    fn sqrt(&self) -> Option<Self> {
        None
    }

    fn lt_scalar(&self, other: &Self) -> bool {
        self.cmp_scalar(other) == Ordering::Less
    }

    fn le_scalar(&self, other: &Self) -> bool {
        self.cmp_scalar(other) != Ordering::Greater
    }

    /// `self <= other`, forgiving up to the backend tolerance.
    fn le_tol(&self, other: &Self) -> bool {
        self.le_scalar(other) || self.eq_scalar(other)
    }

    fn min_scalar(self, other: Self) -> Self {
        if other.lt_scalar(&self) {
            other
        } else {
            self
        }
    }

    fn max_scalar(self, other: Self) -> Self {
        if other.cmp_scalar(&self) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    fn sum_of(items: impl IntoIterator<Item = Self>) -> Self {
        items.into_iter().fold(Self::zero(), |a, b| a + b)
    }
}

/// Splits a decimal like `-12.25e-3` into an exact fraction.
fn decimal_to_ratio(text: &str) -> Result<(BigInt, BigInt), ParseScalarError> {
    let (mantissa, exp) = match text.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i32 = e
                .parse()
                .map_err(|_| ParseScalarError::new(text, "bad exponent"))?;
            (m, exp)
        }
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if frac_part.contains(['+', '-']) {
        return Err(ParseScalarError::new(text, "bad digits"));
    }
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(ParseScalarError::new(text, "no digits"));
    }
    let numer: BigInt = digits
        .parse()
        .map_err(|_| ParseScalarError::new(text, "bad digits"))?;
    let scale = frac_part.len() as i32 - exp;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        (numer, num::pow::pow(ten, scale as usize))
    } else {
        (numer * num::pow::pow(ten, (-scale) as usize), BigInt::one())
    })
}

fn parse_big_rational(text: &str) -> Result<BigRational, ParseScalarError> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| ParseScalarError::new(text, "bad numerator"))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| ParseScalarError::new(text, "bad denominator"))?;
        if d.is_zero() {
            return Err(ParseScalarError::new(text, "zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    let (n, d) = decimal_to_ratio(text)?;
    Ok(BigRational::new(n, d))
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn eq_scalar(&self, other: &Self) -> bool {
        self == other
    }

    fn cmp_scalar(&self, other: &Self) -> Ordering {
        Ord::cmp(self, other)
    }

    fn to_f64_lossy(&self) -> f64 {
        num::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse(text: &str) -> Result<Self, ParseScalarError> {
        parse_big_rational(text)
    }

    fn to_json(&self) -> Value {
        Value::String(format!("{}/{}", self.numer(), self.denom()))
    }

    fn tolerance() -> Option<f64> {
        None
    }
}

impl Scalar for Ratio<i128> {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_int(v: i64) -> Self {
        Ratio::from_integer(v as i128)
    }

    fn ratio(num: i64, den: i64) -> Self {
        Ratio::new(num as i128, den as i128)
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn eq_scalar(&self, other: &Self) -> bool {
        self == other
    }

    fn cmp_scalar(&self, other: &Self) -> Ordering {
        Ord::cmp(self, other)
    }

    fn to_f64_lossy(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn parse(text: &str) -> Result<Self, ParseScalarError> {
        let big = parse_big_rational(text)?;
        big_to_i128_ratio(&big).ok_or_else(|| ParseScalarError::new(text, "out of i128 range"))
    }

    fn to_json(&self) -> Value {
        Value::String(format!("{}/{}", self.numer(), self.denom()))
    }

    fn tolerance() -> Option<f64> {
        None
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn eq_scalar(&self, other: &Self) -> bool {
        let scale = 1.0_f64.max(f64::abs(*self)).max(f64::abs(*other));
        f64::abs(self - other) <= FLOAT_TOL * scale
    }

    fn cmp_scalar(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).expect("NaN in scalar comparison")
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }

    fn parse(text: &str) -> Result<Self, ParseScalarError> {
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let n: f64 = num
                .trim()
                .parse()
                .map_err(|_| ParseScalarError::new(text, "bad numerator"))?;
            let d: f64 = den
                .trim()
                .parse()
                .map_err(|_| ParseScalarError::new(text, "bad denominator"))?;
            if d == 0.0 {
                return Err(ParseScalarError::new(text, "zero denominator"));
            }
            return Ok(n / d);
        }
        let v: f64 = text
            .parse()
            .map_err(|_| ParseScalarError::new(text, "bad float"))?;
        if !v.is_finite() {
            return Err(ParseScalarError::new(text, "not finite"));
        }
        Ok(v)
    }

    fn to_json(&self) -> Value {
        Value::Number(serde_json::Number::from_f64(*self).expect("finite float"))
    }

    fn tolerance() -> Option<f64> {
        Some(FLOAT_TOL)
    }

    fn sqrt(&self) -> Option<Self> {
        Some(f64::sqrt(*self))
    }
}

/// Exact narrowing from `BigRational` to `Ratio<i128>`; `None` on overflow.
pub fn big_to_i128_ratio(v: &BigRational) -> Option<Ratio<i128>> {
    let numer = i128::try_from(v.numer()).ok()?;
    let denom = i128::try_from(v.denom()).ok()?;
    Some(Ratio::new(numer, denom))
}

/// Convenience constructor for exact rationals in tests and examples.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::ratio(num, den)
}
