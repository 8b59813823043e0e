//! Forward-mode derivative carriers.
//!
//! [`Dual`] is a first-order dual number; nesting it (`Dual<Dual<f64>>`)
//! gives exact second directional derivatives, which is how the
//! expression evaluator fills Hessians (one pass per coordinate pair).
//! [`Jet2`] is the vector form of the same data — value, gradient and
//! upper-triangle Hessian in the four chart coordinates — and is itself a
//! `Scalar`, so pointwise matrix algebra (frame changes, musical
//! inversions, wedge coefficients) propagates exact 2-jets through
//! compositions without any finite differencing.

use crate::scalar::{Analytic, Conjugate, Scalar};
use num_complex::Complex64;
use num_traits::{One, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// First-order dual number `v + d·ε`, `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub v: T,
    pub d: T,
}

impl<T: Scalar> Dual<T> {
    #[inline]
    pub fn new(v: T, d: T) -> Self {
        Dual { v, d }
    }

    #[inline]
    pub fn constant(v: T) -> Self {
        Dual { v, d: T::zero() }
    }

    /// Seeded variable: derivative one in its own direction.
    #[inline]
    pub fn variable(v: T) -> Self {
        Dual { v, d: T::one() }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.v + rhs.v, self.d + rhs.d)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.v - rhs.v, self.d - rhs.d)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Dual::new(self.v * rhs.v, self.d * rhs.v + self.v * rhs.d)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        Dual::new(
            self.v / rhs.v,
            (self.d * rhs.v - self.v * rhs.d) / (rhs.v * rhs.v),
        )
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.v, -self.d)
    }
}

impl<T: Scalar> Zero for Dual<T> {
    #[inline]
    fn zero() -> Self {
        Dual::constant(T::zero())
    }

    #[inline]
    fn is_zero(&self) -> bool {
        self.v.is_zero() && self.d.is_zero()
    }
}

impl<T: Scalar> One for Dual<T> {
    #[inline]
    fn one() -> Self {
        Dual::constant(T::one())
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Dual::constant(T::from_f64(x))
    }

    #[inline]
    fn magnitude(self) -> f64 {
        self.v.magnitude()
    }
}

impl<T: Analytic> Analytic for Dual<T> {
    #[inline]
    fn value(self) -> f64 {
        self.v.value()
    }

    #[inline]
    fn sin(self) -> Self {
        Dual::new(self.v.sin(), self.d * self.v.cos())
    }

    #[inline]
    fn cos(self) -> Self {
        Dual::new(self.v.cos(), -(self.d * self.v.sin()))
    }

    #[inline]
    fn exp(self) -> Self {
        let e = self.v.exp();
        Dual::new(e, self.d * e)
    }

    #[inline]
    fn ln(self) -> Self {
        Dual::new(self.v.ln(), self.d / self.v)
    }

    #[inline]
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        Dual::new(s, self.d / (s + s))
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        Dual::new(
            self.v.powi(n),
            self.d * T::from_f64(f64::from(n)) * self.v.powi(n - 1),
        )
    }
}

pub type Dual64 = Dual<f64>;
/// Nested dual carrying one second directional derivative in `d.d`.
pub type Dual2 = Dual<Dual<f64>>;

/// Variable seeds for one Hessian pass: outer `ε` along axis `i`, inner
/// along axis `j`. After evaluation, `v.v` is the value, `v.d` the
/// i-derivative, `d.v` the j-derivative and `d.d` the (i,j) second
/// derivative.
pub fn dual2_seed(p: [f64; 4], i: usize, j: usize) -> [Dual2; 4] {
    std::array::from_fn(|k| Dual {
        v: Dual {
            v: p[k],
            d: if k == i { 1.0 } else { 0.0 },
        },
        d: Dual {
            v: if k == j { 1.0 } else { 0.0 },
            d: 0.0,
        },
    })
}

/// Position of the `(i, j)` Hessian entry, `i <= j`, in the packed upper
/// triangle of a symmetric 4x4 matrix.
#[inline]
pub fn hidx(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (7 - i) / 2 + j
}

/// Second-order jet in the four chart coordinates: value, gradient and
/// packed symmetric Hessian, all over an arbitrary coefficient scalar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2<T> {
    pub v: T,
    pub g: [T; 4],
    pub h: [T; 10],
}

impl<T: Scalar> Jet2<T> {
    #[inline]
    pub fn constant(v: T) -> Self {
        Jet2 {
            v,
            g: [T::zero(); 4],
            h: [T::zero(); 10],
        }
    }

    /// Jet of the coordinate function `x_axis` at value `v`.
    #[inline]
    pub fn coordinate(axis: usize, v: T) -> Self {
        let mut g = [T::zero(); 4];
        g[axis] = T::one();
        Jet2 {
            v,
            g,
            h: [T::zero(); 10],
        }
    }

    #[inline]
    pub fn hess(&self, i: usize, j: usize) -> T {
        self.h[hidx(i, j)]
    }

    /// Multiplicative inverse: 1/u with first and second derivatives.
    pub fn recip(self) -> Self {
        let w = T::one() / self.v;
        let w2 = w * w;
        let w3 = w2 * w;
        let two = T::from_f64(2.0);
        let mut g = [T::zero(); 4];
        for (k, gk) in g.iter_mut().enumerate() {
            *gk = -(self.g[k] * w2);
        }
        let mut h = [T::zero(); 10];
        for i in 0..4 {
            for j in i..4 {
                h[hidx(i, j)] = two * self.g[i] * self.g[j] * w3 - self.h[hidx(i, j)] * w2;
            }
        }
        Jet2 { v: w, g, h }
    }

    /// Jet of the partial derivative along `axis`. Only the value and
    /// gradient of the result are known from a 2-jet; the Hessian slot is
    /// zero and callers must track the lost order.
    pub fn derivative(self, axis: usize) -> Self {
        let mut g = [T::zero(); 4];
        for (k, gk) in g.iter_mut().enumerate() {
            *gk = self.hess(axis, k);
        }
        Jet2 {
            v: self.g[axis],
            g,
            h: [T::zero(); 10],
        }
    }

    pub fn map<U: Scalar>(self, f: impl Fn(T) -> U) -> Jet2<U> {
        Jet2 {
            v: f(self.v),
            g: self.g.map(&f),
            h: self.h.map(&f),
        }
    }
}

impl<T: Scalar> Add for Jet2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Jet2 {
            v: self.v + rhs.v,
            g: std::array::from_fn(|k| self.g[k] + rhs.g[k]),
            h: std::array::from_fn(|k| self.h[k] + rhs.h[k]),
        }
    }
}

impl<T: Scalar> Sub for Jet2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Jet2 {
            v: self.v - rhs.v,
            g: std::array::from_fn(|k| self.g[k] - rhs.g[k]),
            h: std::array::from_fn(|k| self.h[k] - rhs.h[k]),
        }
    }
}

impl<T: Scalar> Neg for Jet2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet2 {
            v: -self.v,
            g: self.g.map(|x| -x),
            h: self.h.map(|x| -x),
        }
    }
}

impl<T: Scalar> Mul for Jet2<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut h = [T::zero(); 10];
        for i in 0..4 {
            for j in i..4 {
                let k = hidx(i, j);
                h[k] = self.h[k] * rhs.v
                    + rhs.h[k] * self.v
                    + self.g[i] * rhs.g[j]
                    + self.g[j] * rhs.g[i];
            }
        }
        Jet2 {
            v: self.v * rhs.v,
            g: std::array::from_fn(|k| self.g[k] * rhs.v + self.v * rhs.g[k]),
            h,
        }
    }
}

impl<T: Scalar> Div for Jet2<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<T: Scalar> Zero for Jet2<T> {
    fn zero() -> Self {
        Jet2::constant(T::zero())
    }

    fn is_zero(&self) -> bool {
        self.v.is_zero() && self.g.iter().all(Zero::is_zero) && self.h.iter().all(Zero::is_zero)
    }
}

impl<T: Scalar> One for Jet2<T> {
    fn one() -> Self {
        Jet2::constant(T::one())
    }
}

impl<T: Scalar> Scalar for Jet2<T> {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Jet2::constant(T::from_f64(x))
    }

    #[inline]
    fn magnitude(self) -> f64 {
        self.v.magnitude()
    }
}

impl<T: Scalar + Conjugate> Conjugate for Jet2<T> {
    fn conj(self) -> Self {
        self.map(Conjugate::conj)
    }
}

/// Real 2-jet.
pub type Jet = Jet2<f64>;
/// Complex-coefficient 2-jet; the workhorse of field evaluation.
pub type CJet = Jet2<Complex64>;

impl Jet2<f64> {
    pub fn promote(self) -> CJet {
        self.map(|x| Complex64::new(x, 0.0))
    }
}

impl CJet {
    pub fn re_jet(self) -> Jet {
        self.map(|x| x.re)
    }

    pub fn im_jet(self) -> Jet {
        self.map(|x| x.im)
    }

    /// Largest absolute value over all jet components.
    pub fn max_component(self) -> f64 {
        let mut m = self.v.norm();
        for x in self.g {
            m = m.max(x.norm());
        }
        for x in self.h {
            m = m.max(x.norm());
        }
        m
    }
}
