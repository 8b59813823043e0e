//! Scalar abstraction the numeric kernels are generic over.
//!
//! Chart calculus runs over several coefficient types: plain floats,
//! complex numbers, dual numbers for forward derivatives, and 2-jets for
//! propagating derivatives through pointwise linear algebra. `Scalar`
//! captures the shared field arithmetic plus a pivoting magnitude;
//! `Analytic` adds the transcendental functions the expression language
//! exposes. Concrete f64-based aliases live at the crate root.

use num_complex::Complex64;
use num_traits::{One, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Field arithmetic with a real magnitude usable for pivot selection.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    fn from_f64(x: f64) -> Self;

    /// Absolute size of the leading (value) part; used for pivoting and
    /// zero tests, never for derivatives.
    fn magnitude(self) -> f64;
}

/// Scalars supporting the function set of the expression language.
pub trait Analytic: Scalar {
    /// Real value part, recursively through duals.
    fn value(self) -> f64;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;

    /// Integer power, valid for negative exponents away from zero.
    fn powi(self, n: i32) -> Self;
}

/// Complex conjugation, extended componentwise to jets.
pub trait Conjugate {
    fn conj(self) -> Self;
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn from_f64(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn magnitude(self) -> f64 {
                num_traits::Float::abs(self) as f64
            }
        }

        impl Analytic for $t {
            #[inline]
            fn value(self) -> f64 {
                self as f64
            }

            #[inline]
            fn sin(self) -> Self {
                num_traits::Float::sin(self)
            }

            #[inline]
            fn cos(self) -> Self {
                num_traits::Float::cos(self)
            }

            #[inline]
            fn exp(self) -> Self {
                num_traits::Float::exp(self)
            }

            #[inline]
            fn ln(self) -> Self {
                num_traits::Float::ln(self)
            }

            #[inline]
            fn sqrt(self) -> Self {
                num_traits::Float::sqrt(self)
            }

            #[inline]
            fn powi(self, n: i32) -> Self {
                num_traits::Float::powi(self, n)
            }
        }

        impl Conjugate for $t {
            #[inline]
            fn conj(self) -> Self {
                self
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for Complex64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }

    #[inline]
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

impl Conjugate for Complex64 {
    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
}
