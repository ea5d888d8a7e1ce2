//! Numeric backends.
//!
//! Every algorithm in this crate is generic over [`Scalar`], which is
//! implemented for `f64` (fast, approximate comparisons governed by a
//! tolerance) and [`Rational`] (arbitrary precision, exact comparisons).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact arbitrary-precision rational number.
pub type Rational = num_rational::BigRational;

/// Which number type the solvers run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Float,
    Rational,
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "float" | "floating" | "f64" => Ok(Backend::Float),
            "rational" | "exact" => Ok(Backend::Rational),
            other => Err(format!("unknown backend `{other}` (expected float or rational)")),
        }
    }
}

/// Number type used for probabilities and valuations.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic and comparisons are exact.
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;

    /// Exact rational image of the number (the binary expansion for `f64`).
    fn to_rational(&self) -> Rational;

    fn to_f64(&self) -> f64;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn abs(&self) -> Self;

    /// Magnitude below which the simplex treats a tableau entry as zero.
    fn pivot_eps() -> Self;

    /// `self == other`, up to `tol` for inexact backends.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;

    /// `self > other + tol` for inexact backends, `self > other` otherwise.
    fn exceeds(&self, other: &Self, tol: f64) -> bool;

    /// Human and machine readable rendering: reduced fraction when exact,
    /// fixed-point decimal with 15 significant digits otherwise.
    fn render(&self) -> String;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).unwrap_or_else(Rational::zero)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn pivot_eps() -> Self {
        1e-11
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }

    fn exceeds(&self, other: &Self, tol: f64) -> bool {
        *self > *other + tol
    }

    fn render(&self) -> String {
        format_fixed(*self)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn pivot_eps() -> Self {
        Rational::zero()
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn exceeds(&self, other: &Self, _tol: f64) -> bool {
        self > other
    }

    fn render(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

/// Fixed-point rendering with 15 significant digits, trailing zeros trimmed.
pub fn format_fixed(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (14 - magnitude).max(0) as usize;
    let mut s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseProbabilityError {
    #[error("empty probability literal")]
    Empty,
    #[error("malformed probability literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("`{0}` has more than 18 significant digits")]
    TooPrecise(String),
}

/// Parses `"p/q"`, `"0.125"`, `"1"` or `"1e-3"` into an exact rational.
///
/// With `strict_digits` set, decimal literals with more than 18 significant
/// digits are rejected.
pub fn parse_probability(text: &str, strict_digits: bool) -> Result<Rational, ParseProbabilityError> {
    let t = text.trim();
    if t.is_empty() {
        return Err(ParseProbabilityError::Empty);
    }
    let malformed = || ParseProbabilityError::Malformed(t.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| malformed())?;
        let d: BigInt = d.trim().parse().map_err(|_| malformed())?;
        if d.is_zero() {
            return Err(ParseProbabilityError::ZeroDenominator(t.to_string()));
        }
        return Ok(Rational::new(n, d));
    }

    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = t[i + 1..].parse().map_err(|_| malformed())?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (negative, digits_part) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits_part.split_once('.').unwrap_or((digits_part, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(malformed());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let significant = all_digits.trim_start_matches('0').trim_end_matches('0').len();
    if strict_digits && significant > 18 {
        return Err(ParseProbabilityError::TooPrecise(t.to_string()));
    }
    let mut numer: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits.parse().map_err(|_| malformed())?
    };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u8);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}
