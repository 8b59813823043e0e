//! Complex-valued scalar fields on a chart.
//!
//! A field is either expression-backed (a pair of symbolic real
//! expressions for the real and imaginary parts, differentiable to any
//! order) or closure-backed (a function producing second-order jets,
//! with a tracked remaining derivative order). Arithmetic between
//! expression-backed fields stays symbolic; anything involving a
//! closure becomes a closure whose jets are combined exactly by jet
//! arithmetic, capped at order 2.
//!
//! The order tag is load-bearing: differentiating a closure-backed
//! field shifts its jet down and zeroes the Hessian slot, so consumers
//! that need true second derivatives (curvature) must refuse fields of
//! order below 2 rather than silently read zeros.

use crate::error::{Error, Result};
use crate::expr::{Expression, VarSet, WALKER_VARS};
use crate::jet::{CJet, Jet};
use crate::scalar::Conjugate;
use num_complex::Complex64;
use std::sync::Arc;

/// Order tag for expression-backed fields: differentiable without end.
pub const ORDER_UNLIMITED: u8 = u8::MAX;

type JetFn = dyn Fn([f64; 4]) -> Result<CJet> + Send + Sync;

#[derive(Clone)]
pub enum CField {
    Expr { re: Expression, im: Expression },
    Closure { order: u8, f: Arc<JetFn> },
}

impl std::fmt::Debug for CField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CField::Expr { re, im } => write!(f, "Expr({re}, {im})"),
            CField::Closure { order, .. } => write!(f, "Closure(order {order})"),
        }
    }
}

fn combine_jets(re: Jet, im: Jet) -> CJet {
    CJet {
        v: Complex64::new(re.v, im.v),
        g: std::array::from_fn(|i| Complex64::new(re.g[i], im.g[i])),
        h: std::array::from_fn(|i| Complex64::new(re.h[i], im.h[i])),
    }
}


/// Reconcile the variable sets of the four expression legs of a binary
/// operation: legs without free variables adopt the chart names of the
/// first leg that has some, so constants mix freely with any chart.
fn unify_vars(legs: [&Expression; 4]) -> [Expression; 4] {
    let target = legs
        .iter()
        .find(|e| e.free_vars() != [false; 4])
        .map(|e| e.vars)
        .unwrap_or(legs[0].vars);
    legs.map(|e| {
        if e.vars != target && e.free_vars() == [false; 4] {
            Expression {
                ast: e.ast.clone(),
                vars: target,
            }
        } else {
            e.clone()
        }
    })
}

impl CField {
    pub fn constant(c: Complex64) -> Self {
        CField::Expr {
            re: Expression::constant(c.re, WALKER_VARS),
            im: Expression::constant(c.im, WALKER_VARS),
        }
    }

    pub fn constant_real(x: f64) -> Self {
        Self::constant(Complex64::new(x, 0.0))
    }

    pub fn zero() -> Self {
        Self::constant_real(0.0)
    }

    /// Real expression-backed field.
    pub fn from_expr(re: Expression) -> Self {
        let vars = re.vars;
        CField::Expr {
            re,
            im: Expression::constant(0.0, vars),
        }
    }

    pub fn from_re_im(re: Expression, im: Expression) -> Self {
        debug_assert_eq!(re.vars, im.vars);
        CField::Expr { re, im }
    }

    pub fn parse_real(text: &str, vars: VarSet) -> Result<Self> {
        Ok(Self::from_expr(crate::expr::parse(text, vars)?))
    }

    pub fn from_jet_fn<F>(order: u8, f: F) -> Self
    where
        F: Fn([f64; 4]) -> Result<CJet> + Send + Sync + 'static,
    {
        CField::Closure {
            order: order.min(2),
            f: Arc::new(f),
        }
    }

    /// Remaining exact derivative depth of the jets this field yields.
    pub fn order(&self) -> u8 {
        match self {
            CField::Expr { .. } => ORDER_UNLIMITED,
            CField::Closure { order, .. } => *order,
        }
    }

    pub fn is_const_zero(&self) -> bool {
        matches!(self, CField::Expr { re, im } if re.is_zero() && im.is_zero())
    }

    pub fn eval(&self, p: [f64; 4]) -> Result<CJet> {
        match self {
            CField::Expr { re, im } => Ok(combine_jets(re.eval_jet2(p)?, im.eval_jet2(p)?)),
            CField::Closure { f, .. } => f(p),
        }
    }

    pub fn eval_value(&self, p: [f64; 4]) -> Result<Complex64> {
        match self {
            CField::Expr { re, im } => {
                Ok(Complex64::new(re.eval_value(p)?, im.eval_value(p)?))
            }
            CField::Closure { f, .. } => Ok(f(p)?.v),
        }
    }

    /// Partial derivative along a chart axis. Symbolic for
    /// expression-backed fields; shifts the jet for closures, spending
    /// one order of depth.
    pub fn diff(&self, axis: usize) -> Result<CField> {
        match self {
            CField::Expr { re, im } => Ok(CField::Expr {
                re: re.derivative(axis),
                im: im.derivative(axis),
            }),
            CField::Closure { order, f } => {
                if *order == 0 {
                    return Err(Error::JetOrder {
                        needed: 1,
                        available: 0,
                    });
                }
                let f = f.clone();
                Ok(CField::Closure {
                    order: order - 1,
                    f: Arc::new(move |p| Ok(f(p)?.derivative(axis))),
                })
            }
        }
    }

    fn to_closure(&self) -> (u8, Arc<JetFn>) {
        match self {
            CField::Expr { .. } => {
                let me = self.clone();
                (2, Arc::new(move |p| me.eval(p)))
            }
            CField::Closure { order, f } => (*order, f.clone()),
        }
    }

    pub fn add(&self, rhs: &CField) -> CField {
        if self.is_const_zero() {
            return rhs.clone();
        }
        if rhs.is_const_zero() {
            return self.clone();
        }
        match (self, rhs) {
            (CField::Expr { re: ar, im: ai }, CField::Expr { re: br, im: bi }) => {
                let [ar, ai, br, bi] = unify_vars([ar, ai, br, bi]);
                CField::Expr {
                    re: ar.add(&br),
                    im: ai.add(&bi),
                }
            }
            _ => {
                let (oa, fa) = self.to_closure();
                let (ob, fb) = rhs.to_closure();
                CField::Closure {
                    order: oa.min(ob),
                    f: Arc::new(move |p| Ok(fa(p)? + fb(p)?)),
                }
            }
        }
    }

    pub fn sub(&self, rhs: &CField) -> CField {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &CField) -> CField {
        if self.is_const_zero() || rhs.is_const_zero() {
            return CField::zero();
        }
        match (self, rhs) {
            (CField::Expr { re: ar, im: ai }, CField::Expr { re: br, im: bi }) => {
                let [ar, ai, br, bi] = unify_vars([ar, ai, br, bi]);
                CField::Expr {
                    re: ar.mul(&br).sub(&ai.mul(&bi)),
                    im: ar.mul(&bi).add(&ai.mul(&br)),
                }
            }
            _ => {
                let (oa, fa) = self.to_closure();
                let (ob, fb) = rhs.to_closure();
                CField::Closure {
                    order: oa.min(ob),
                    f: Arc::new(move |p| Ok(fa(p)? * fb(p)?)),
                }
            }
        }
    }

    pub fn neg(&self) -> CField {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale_re(&self, s: f64) -> CField {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> CField {
        match self {
            CField::Expr { re, im } => CField::Expr {
                re: re.scale(c.re).sub(&im.scale(c.im)),
                im: im.scale(c.re).add(&re.scale(c.im)),
            },
            CField::Closure { order, f } => {
                let f = f.clone();
                let jc = CJet::constant(c);
                CField::Closure {
                    order: *order,
                    f: Arc::new(move |p| Ok(jc * f(p)?)),
                }
            }
        }
    }

    pub fn conj(&self) -> CField {
        match self {
            CField::Expr { re, im } => CField::Expr {
                re: re.clone(),
                im: im.neg(),
            },
            CField::Closure { order, f } => {
                let f = f.clone();
                CField::Closure {
                    order: *order,
                    f: Arc::new(move |p| Ok(f(p)?.conj())),
                }
            }
        }
    }

    pub fn re_part(&self) -> CField {
        match self {
            CField::Expr { re, im } => CField::Expr {
                re: re.clone(),
                im: Expression::constant(0.0, im.vars),
            },
            CField::Closure { order, f } => {
                let f = f.clone();
                CField::Closure {
                    order: *order,
                    f: Arc::new(move |p| Ok(f(p)?.re_jet().promote())),
                }
            }
        }
    }

    pub fn im_part(&self) -> CField {
        match self {
            CField::Expr { re, im } => CField::Expr {
                re: im.clone(),
                im: Expression::constant(0.0, re.vars),
            },
            CField::Closure { order, f } => {
                let f = f.clone();
                CField::Closure {
                    order: *order,
                    f: Arc::new(move |p| Ok(f(p)?.im_jet().promote())),
                }
            }
        }
    }
}
