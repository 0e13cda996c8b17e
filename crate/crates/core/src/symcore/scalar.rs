use num_traits::{One, ToPrimitive, Zero};

use super::Rational;
use crate::error::{Error, Result};

/// Number types an [`Expr`](super::Expr) can be evaluated into.
pub trait Scalar: Clone {
    fn zero_scalar() -> Self;
    fn one_scalar() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn add_scalar(&self, other: &Self) -> Self;
    fn mul_scalar(&self, other: &Self) -> Self;
    fn powi(&self, k: i32) -> Result<Self>;
}

impl Scalar for f64 {
    fn zero_scalar() -> Self {
        0.0
    }

    fn one_scalar() -> Self {
        1.0
    }

    fn from_rational(r: &Rational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn add_scalar(&self, other: &Self) -> Self {
        self + other
    }

    fn mul_scalar(&self, other: &Self) -> Self {
        self * other
    }

    fn powi(&self, k: i32) -> Result<Self> {
        if k < 0 && *self == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(f64::powi(*self, k))
    }
}

impl Scalar for Rational {
    fn zero_scalar() -> Self {
        Zero::zero()
    }

    fn one_scalar() -> Self {
        One::one()
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn add_scalar(&self, other: &Self) -> Self {
        self + other
    }

    fn mul_scalar(&self, other: &Self) -> Self {
        self * other
    }

    fn powi(&self, k: i32) -> Result<Self> {
        if k < 0 && self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(num_traits::pow::Pow::pow(self, k))
    }
}
