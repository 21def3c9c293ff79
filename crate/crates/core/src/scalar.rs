//! Numeric element types shared by the exact and floating-point code paths.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn conj(&self) -> Self;

    /// Exact types ignore `tol` and test for zero.
    fn is_negligible(&self, tol: f64) -> bool;

    fn modulus_sq(&self) -> f64;

    fn from_i64(v: i64) -> Self;
}

pub trait Field: Scalar + Div<Output = Self> {
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }
}

impl Scalar for i64 {
    fn conj(&self) -> Self {
        *self
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        *self == 0
    }
    fn modulus_sq(&self) -> f64 {
        (*self as f64) * (*self as f64)
    }
    fn from_i64(v: i64) -> Self {
        v
    }
}

impl Scalar for f64 {
    fn conj(&self) -> Self {
        *self
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
    fn modulus_sq(&self) -> f64 {
        self * self
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Field for f64 {}

impl Scalar for Complex64 {
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
    fn modulus_sq(&self) -> f64 {
        self.norm_sqr()
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
}

impl Field for Complex64 {}

impl Scalar for BigRational {
    fn conj(&self) -> Self {
        self.clone()
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn modulus_sq(&self) -> f64 {
        let v = self.to_f64().unwrap_or(f64::INFINITY);
        v * v
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

impl Field for BigRational {}

/// Parses `"3"`, `"-1/2"` or `"0.125"` exactly.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if t.contains('/') {
        return BigRational::from_str(t).ok();
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
