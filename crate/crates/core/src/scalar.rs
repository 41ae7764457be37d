//! Scalar field abstraction: `f64` for production runs and exact rationals
//! for zero-tolerance certification at small system sizes.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

/// Exact rational scalar.
pub type Rational = BigRational;

pub trait Scalar: Clone + fmt::Debug + PartialOrd + Signed + Send + Sync + 'static {
    /// Converts a double. Exact for [`Rational`]: every finite double is a
    /// dyadic rational.
    fn of_f64(x: f64) -> Self;

    fn of_i64(x: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Whether `self` is zero up to `tol` (absolute). Rationals ignore `tol`.
    fn near_zero(&self, tol: f64) -> bool;

    const EXACT: bool;
}

impl Scalar for f64 {
    fn of_f64(x: f64) -> Self {
        x
    }

    fn of_i64(x: i64) -> Self {
        x as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn near_zero(&self, tol: f64) -> bool {
        self.abs() <= tol
    }

    const EXACT: bool = false;
}

impl Scalar for Rational {
    fn of_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite rate")
    }

    fn of_i64(x: i64) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn near_zero(&self, _tol: f64) -> bool {
        num_traits::Zero::is_zero(self)
    }

    const EXACT: bool = true;
}
