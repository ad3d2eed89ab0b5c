use std::fmt::Debug;
use std::ops::Neg;

use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Arithmetic used by the simplex; `f64` compares with tolerances, rationals exactly.
pub trait Scalar: Clone + Debug + PartialOrd + Num + Neg<Output = Self> {
    /// Whether comparisons are exact.
    const EXACT: bool;

    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn is_negligible(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }
    /// Snaps values that are numerically zero.
    fn clean(self) -> Self;
    fn to_f64(&self) -> f64;
    fn from_f64(x: f64) -> Option<Self>;
    fn is_finite_value(&self) -> bool;
    fn abs_value(&self) -> Self {
        if self.is_neg() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

const ZERO_TOL: f64 = 1e-9;

impl Scalar for f64 {
    const EXACT: bool = false;

    fn is_pos(&self) -> bool {
        *self > ZERO_TOL
    }

    fn is_neg(&self) -> bool {
        *self < -ZERO_TOL
    }

    fn clean(self) -> Self {
        if self.abs() < 1e-12 {
            0.0
        } else {
            self
        }
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn is_pos(&self) -> bool {
        self.is_positive()
    }

    fn is_neg(&self) -> bool {
        self.is_negative()
    }

    fn clean(self) -> Self {
        self
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn is_finite_value(&self) -> bool {
        true
    }
}

/// Rational to nearest-ish double, robust to huge numerators and denominators.
pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = r.numer().bits().max(r.denom().bits()) as i64 - 60;
    let (n, d) = if shift > 0 {
        (r.numer() >> shift as usize, r.denom() >> shift as usize)
    } else {
        (r.numer().clone(), r.denom().clone())
    };
    if d.is_zero() {
        return if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    n.to_f64().unwrap_or(0.0) / d.to_f64().unwrap_or(1.0)
}
