//! Walker metrics on a chart (x, y, z, t) and their proper almost
//! para-hyperhermitian structures.
//!
//! A Walker metric carries a parallel field of null 2-planes; in
//! adapted coordinates it is determined by three functions a, b, c
//! through the matrix rows (0,0,1,0), (0,0,0,1), (1,0,a,c),
//! (0,1,c,b). The null plane is spanned by ∂x and ∂y. The proper
//! structure is built from the orthonormal frame
//!
//!   e₁ = (1−a)/2 ∂x + ∂z,        e₂ = −c ∂x + (1−b)/2 ∂y + ∂t,
//!   e₃ = −(1+a)/2 ∂x + ∂z,       e₄ = −c ∂x − (1+b)/2 ∂y + ∂t,
//!
//! on which the triple acts canonically (J₁e₁ = e₂, J₁e₃ = e₄,
//! J₂e₁ = e₃, J₂e₂ = −e₄, J₃ = J₁J₂). The structure is
//! para-hyperhermitian exactly when a, b, c are the quadratics of a
//! six-function family over (z,t), and para-hyperkähler exactly when
//! a, b, c do not depend on x and y; both certificates are sampled
//! here.

use crate::error::{Error, Result};
use crate::expr::{parse, Expression, WALKER_VARS};
use crate::field::CField;
use crate::forms::{EndomorphismField, MetricField};
use crate::report::{Residual, VerificationReport};
use crate::splitquat::canonical_triple;
use crate::structures::{fundamental_forms, phk_volume, AlmostPHStructure};
use crate::tol;

#[derive(Clone, Debug)]
pub struct WalkerData {
    pub a: Expression,
    pub b: Expression,
    pub c: Expression,
}

impl WalkerData {
    pub fn new(a: Expression, b: Expression, c: Expression) -> Self {
        WalkerData { a, b, c }
    }

    /// Parse the three component functions over (x, y, z, t).
    pub fn from_strs(a: &str, b: &str, c: &str) -> Result<Self> {
        Ok(WalkerData {
            a: parse(a, WALKER_VARS)?,
            b: parse(b, WALKER_VARS)?,
            c: parse(c, WALKER_VARS)?,
        })
    }

    pub fn flat() -> Self {
        let zero = Expression::constant(0.0, WALKER_VARS);
        WalkerData::new(zero.clone(), zero.clone(), zero)
    }
}

/// Coefficient functions of the quadratic family
/// a = x²K + xP + ξ, b = y²K + yT + η, c = xyK + ½xT + ½yP + γ,
/// all depending on (z, t) only.
#[derive(Clone, Debug)]
pub struct PCFamily {
    pub k: Expression,
    pub p: Expression,
    pub t: Expression,
    pub xi: Expression,
    pub eta: Expression,
    pub gamma: Expression,
}

impl PCFamily {
    pub fn new(
        k: Expression,
        p: Expression,
        t: Expression,
        xi: Expression,
        eta: Expression,
        gamma: Expression,
    ) -> Result<Self> {
        let fam = PCFamily {
            k,
            p,
            t,
            xi,
            eta,
            gamma,
        };
        fam.validate()?;
        Ok(fam)
    }

    /// Parse the six coefficient functions; they may mention z and t
    /// only.
    pub fn from_strs(
        k: &str,
        p: &str,
        t: &str,
        xi: &str,
        eta: &str,
        gamma: &str,
    ) -> Result<Self> {
        PCFamily::new(
            parse(k, WALKER_VARS)?,
            parse(p, WALKER_VARS)?,
            parse(t, WALKER_VARS)?,
            parse(xi, WALKER_VARS)?,
            parse(eta, WALKER_VARS)?,
            parse(gamma, WALKER_VARS)?,
        )
    }

    fn validate(&self) -> Result<()> {
        let names = ["K", "P", "T", "xi", "eta", "gamma"];
        for (name, e) in names.iter().zip([
            &self.k, &self.p, &self.t, &self.xi, &self.eta, &self.gamma,
        ]) {
            let free = e.free_vars();
            if free[0] || free[1] {
                return Err(Error::InvalidParams {
                    message: format!(
                        "coefficient {name} must depend on (z,t) only, found x or y"
                    ),
                });
            }
        }
        Ok(())
    }
}

/// The neutral metric with rows (0,0,1,0), (0,0,0,1), (1,0,a,c),
/// (0,1,c,b). Its determinant is 1 for any a, b, c, and ∂x, ∂y span a
/// null 2-plane.
pub fn walker_metric(d: &WalkerData) -> MetricField {
    let zero = CField::zero();
    let one = CField::constant_real(1.0);
    let a = CField::from_expr(d.a.clone());
    let b = CField::from_expr(d.b.clone());
    let c = CField::from_expr(d.c.clone());
    MetricField::from_fields([
        [zero.clone(), zero.clone(), one.clone(), zero.clone()],
        [zero.clone(), zero.clone(), zero.clone(), one.clone()],
        [one.clone(), zero.clone(), a, c.clone()],
        [zero.clone(), one, c, b],
    ])
}

/// Columns of the frame matrix: the frame vectors in chart
/// coordinates.
fn frame_matrix(d: &WalkerData) -> EndomorphismField {
    let half = |e: &Expression| CField::from_expr(e.clone()).scale_re(0.5);
    let one_minus_a = Expression::constant(1.0, WALKER_VARS).sub(&d.a);
    let one_plus_a = Expression::constant(1.0, WALKER_VARS).add(&d.a);
    let one_minus_b = Expression::constant(1.0, WALKER_VARS).sub(&d.b);
    let one_plus_b = Expression::constant(1.0, WALKER_VARS).add(&d.b);
    let mc = CField::from_expr(d.c.clone()).scale_re(-1.0);
    let zero = CField::zero();
    let one = CField::constant_real(1.0);
    // Row r holds the r-th coordinate of every frame vector.
    EndomorphismField::from_fields([
        [
            half(&one_minus_a),
            mc.clone(),
            half(&one_plus_a).scale_re(-1.0),
            mc,
        ],
        [
            zero.clone(),
            half(&one_minus_b),
            zero.clone(),
            half(&one_plus_b).scale_re(-1.0),
        ],
        [one.clone(), zero.clone(), one.clone(), zero.clone()],
        [zero.clone(), one.clone(), zero.clone(), one],
    ])
}

/// Columns of the inverse frame matrix: the coordinate vectors in
/// frame coordinates. Closed form, so every entry stays polynomial in
/// a, b, c.
fn frame_matrix_inverse(d: &WalkerData) -> EndomorphismField {
    let half = |e: &Expression| CField::from_expr(e.clone()).scale_re(0.5);
    let one_minus_a = Expression::constant(1.0, WALKER_VARS).sub(&d.a);
    let one_plus_a = Expression::constant(1.0, WALKER_VARS).add(&d.a);
    let one_minus_b = Expression::constant(1.0, WALKER_VARS).sub(&d.b);
    let one_plus_b = Expression::constant(1.0, WALKER_VARS).add(&d.b);
    let c = CField::from_expr(d.c.clone());
    let zero = CField::zero();
    let one = CField::constant_real(1.0);
    EndomorphismField::from_fields([
        [one.clone(), zero.clone(), half(&one_plus_a), c.clone()],
        [zero.clone(), one.clone(), zero.clone(), half(&one_plus_b)],
        [
            one.clone().scale_re(-1.0),
            zero.clone(),
            half(&one_minus_a),
            c.scale_re(-1.0),
        ],
        [
            zero.clone(),
            one.scale_re(-1.0),
            zero.clone(),
            half(&one_minus_b),
        ],
    ])
}

/// The proper almost para-hyperhermitian structure of a Walker
/// metric: the canonical triple conjugated by the frame, Jₖ = E∘J₀ᵏ∘E⁻¹.
pub fn proper_structure(d: &WalkerData) -> AlmostPHStructure {
    let e = frame_matrix(d);
    let einv = frame_matrix_inverse(d);
    let t0 = canonical_triple();
    let j = [t0.j1, t0.j2, t0.j3].map(|j0| {
        e.compose(&EndomorphismField::from_const(&j0)).compose(&einv)
    });
    let mut s = AlmostPHStructure::new(walker_metric(d), j);
    s.domain = [(-1.0, 1.0); 4];
    s
}

/// Walker data of the quadratic family: para-hyperhermitian by
/// construction.
pub fn pc_family(f: &PCFamily) -> Result<WalkerData> {
    f.validate()?;
    let x = Expression::variable(0, WALKER_VARS);
    let y = Expression::variable(1, WALKER_VARS);
    let a = x.mul(&x).mul(&f.k).add(&x.mul(&f.p)).add(&f.xi);
    let b = y.mul(&y).mul(&f.k).add(&y.mul(&f.t)).add(&f.eta);
    let c = x
        .mul(&y)
        .mul(&f.k)
        .add(&x.mul(&f.t).scale(0.5))
        .add(&y.mul(&f.p).scale(0.5))
        .add(&f.gamma);
    Ok(WalkerData::new(a, b, c))
}

/// Residuals that vanish exactly when (a, b, c) has the quadratic
/// family shape. The first ten pin the shape down; the last is the
/// redundant t-derivative coupling of c and b, reported for
/// diagnosis.
pub fn pc_form_check(d: &WalkerData, samples: &[[f64; 4]]) -> Result<VerificationReport> {
    let (x, y, t) = (0usize, 1usize, 3usize);
    let a_x = d.a.derivative(x);
    let b_y = d.b.derivative(y);
    let c_x = d.c.derivative(x);
    let c_y = d.c.derivative(y);
    let named: [(&str, Expression); 11] = [
        ("a_xxx", a_x.derivative(x).derivative(x)),
        ("a_y", d.a.derivative(y)),
        ("b_x", d.b.derivative(x)),
        ("b_xx", d.b.derivative(x).derivative(x)),
        ("c_xx", c_x.derivative(x)),
        ("c_yy", c_y.derivative(y)),
        ("a_xx - b_yy", a_x.derivative(x).sub(&b_y.derivative(y))),
        (
            "a_xx - 2 c_xy",
            a_x.derivative(x).sub(&c_x.derivative(y).scale(2.0)),
        ),
        ("2 c_x - b_y", c_x.scale(2.0).sub(&b_y)),
        ("2 c_y - a_x", c_y.scale(2.0).sub(&a_x)),
        (
            "2 c_xt - b_yt",
            c_x.derivative(t).scale(2.0).sub(&b_y.derivative(t)),
        ),
    ];
    let mut report = VerificationReport::new("walker-pc-form", 0, samples.len());
    for (name, e) in &named {
        let mut res = Residual::new();
        for &p in samples {
            res.record(e.eval_value(p)?.abs());
        }
        report.check_max(name, res.max, res.mean(), tol::FIRST_DERIVATIVE);
    }
    Ok(report)
}

/// Para-hyperkähler certificate: a, b, c free of x and y, the three
/// fundamental forms closed, ∂x and ∂y null, orthogonal and parallel,
/// and the metric Ricci-flat with vanishing anti-self-dual Weyl part.
pub fn hk_check(d: &WalkerData, samples: &[[f64; 4]]) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("walker-hk", 0, samples.len());

    let derivs: [(&str, Expression); 6] = [
        ("a_x", d.a.derivative(0)),
        ("a_y", d.a.derivative(1)),
        ("b_x", d.b.derivative(0)),
        ("b_y", d.b.derivative(1)),
        ("c_x", d.c.derivative(0)),
        ("c_y", d.c.derivative(1)),
    ];
    for (name, e) in &derivs {
        let mut res = Residual::new();
        for &p in samples {
            res.record(e.eval_value(p)?.abs());
        }
        report.check_max(name, res.max, res.mean(), tol::FIRST_DERIVATIVE);
    }

    let s = proper_structure(d);
    let f = fundamental_forms(&s);
    for l in 0..3 {
        let dl = f.omega[l].ext_d()?;
        let mut res = Residual::new();
        for &p in samples {
            res.record(dl.max_at(p)?);
        }
        report.check_max(
            &format!("d omega{}", l + 1),
            res.max,
            res.mean(),
            tol::FIRST_DERIVATIVE,
        );
    }

    // ∂x and ∂y are null and orthogonal by the metric block shape;
    // they are parallel when every Christoffel symbol Γ^k_{i0}, Γ^k_{i1}
    // vanishes.
    let mut null_res = Residual::new();
    let mut parallel = [Residual::new(), Residual::new()];
    let mut ricci_res = Residual::new();
    let mut wminus = Residual::new();
    let vol = phk_volume(&f)?;
    for &p in samples {
        let g = s.g.eval_value(p)?;
        null_res.record(g.m[0][0].abs());
        null_res.record(g.m[0][1].abs());
        null_res.record(g.m[1][1].abs());
        let gamma = crate::curvature::christoffel(&s.g, p)?;
        for i in 0..4 {
            for k in 0..4 {
                parallel[0].record(gamma[k][i][0].abs());
                parallel[1].record(gamma[k][i][1].abs());
            }
        }
        let (ric, _) = crate::curvature::ricci(&s.g, p)?;
        ricci_res.record(ric.max_magnitude());
        let w = crate::curvature::weyl_split(&s.g, &vol, p)?;
        wminus.record(w.minus_max);
    }
    report.check_max("null plane", null_res.max, null_res.mean(), tol::EXACT);
    report.check_max(
        "parallel dx",
        parallel[0].max,
        parallel[0].mean(),
        tol::CURVATURE,
    );
    report.check_max(
        "parallel dy",
        parallel[1].max,
        parallel[1].mean(),
        tol::CURVATURE,
    );
    report.check_max("ricci", ricci_res.max, ricci_res.mean(), tol::CURVATURE);
    report.check_max("weyl minus", wminus.max, wminus.mean(), tol::CURVATURE);
    Ok(report)
}
