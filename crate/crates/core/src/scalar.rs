//! Floating-point scalar abstraction.
//!
//! Everything numeric in the crate is generic over [`Scalar`], which is
//! `f32` or `f64`. Tolerances scale with the type's precision.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// `ln Γ(x)` for `x > 0`.
    fn ln_gamma(self) -> Self;

    /// Tolerance on the total mass of a one-step distribution.
    fn normalization_tol() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Scalar for f64 {
    fn ln_gamma(self) -> Self {
        libm::lgamma(self)
    }

    fn normalization_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn ln_gamma(self) -> Self {
        libm::lgammaf(self)
    }

    fn normalization_tol() -> Self {
        1e-5
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_factorials() {
        assert!((Scalar::ln_gamma(5.0f64) - 24f64.ln()).abs() < 1e-13);
        assert!((Scalar::ln_gamma(0.5f64) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
        assert!((Scalar::ln_gamma(5.0f32) - 24f32.ln()).abs() < 1e-5);
    }
}
