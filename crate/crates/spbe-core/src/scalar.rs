//! Scalar abstraction shared by the float solver and the exact verifier.
//!
//! `f64` is used by value iteration and Monte Carlo; [`Rational`] by every
//! certification path. Both go through the same formulas so the two routes
//! differ only in arithmetic.

use std::fmt::Debug;

use num_traits::Signed;

use crate::rational::{self, Rational};

pub trait Scalar: Signed + Clone + Debug + PartialOrd + Send + Sync {
    fn from_rational(r: &Rational) -> Self;
    fn from_int(v: i64) -> Self;
    fn as_f64(&self) -> f64;
    /// True for exact rational arithmetic.
    fn is_exact() -> bool;
}

impl Scalar for f64 {
    fn from_rational(r: &Rational) -> Self {
        rational::to_f64(r)
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn is_exact() -> bool {
        false
    }
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_int(v: i64) -> Self {
        rational::int(v)
    }
    fn as_f64(&self) -> f64 {
        rational::to_f64(self)
    }
    fn is_exact() -> bool {
        true
    }
}
