//! Scalar backends: exact rationals and binary floats behind one trait.
//!
//! Every algebraic routine in this crate is generic over [`Scalar`]. The
//! exact backend is [`num_rational::BigRational`], where arithmetic never
//! rounds; the float backend is `f64`, where comparisons carry an explicit
//! tolerance supplied by the caller (see [`is_negligible`]).

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    /// True for backends where equality tests are exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    /// Exact fraction num/den (den != 0).
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact conversion of a finite double (dyadic rational in exact mode).
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;
    fn is_negative(&self) -> bool;
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(v: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(v).expect("finite float required")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
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
    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
}

/// |value| <= tol * scale. With tol = 0 (exact mode) this is a plain zero
/// test, so one code path serves both backends.
pub fn is_negligible<T: Scalar>(value: &T, tol: &T, scale: &T) -> bool {
    if tol.is_zero() {
        value.is_zero()
    } else {
        value.abs() <= tol.clone() * scale.clone()
    }
}

/// Largest absolute value in a slice (zero for an empty slice).
pub fn max_abs<T: Scalar>(values: &[T]) -> T {
    let mut best = T::zero();
    for v in values {
        let a = v.abs();
        if a > best {
            best = a;
        }
    }
    best
}

/// n! as a scalar.
pub fn factorial<T: Scalar>(n: usize) -> T {
    let mut acc = T::one();
    for i in 2..=n {
        acc *= T::from_int(i as i64);
    }
    acc
}

/// Binomial coefficient C(n, k) as a scalar.
pub fn binomial<T: Scalar>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut num = T::one();
    let mut den = T::one();
    for i in 0..k {
        num *= T::from_int((n - i) as i64);
        den *= T::from_int((i + 1) as i64);
    }
    num / den
}
