//! Inoue-type structures on the chart H × C, coordinates
//! (x₁, y₁, x₂, y₂) with z = x₁ + iy₁ (y₁ > 0) and w = x₂ + iy₂.
//!
//! The data is a unimodular integer matrix N with an eigenvalue α > 1,
//! real eigenvectors (a₁,a₂) for α and (b₁,b₂) for 1/α, integers
//! p, q, r (r ≠ 0) and a complex parameter t. The invariant (1,0)-forms
//! are θ₁ = dz/Im z and θ₂ = dw − ((Im w − s·ln Im z)/Im z)dz with
//! s = Im t/ln α; the form triple (Re(θ₁∧θ̄₂), Re(θ₁∧θ₂), Im(θ₁∧θ₂))
//! is para-hyperhermitian with Lee form −Im θ₁. When t = 0 the
//! involution σ(z,w) = (z,−w) flips the signs of all three forms while
//! preserving the endomorphisms, so the pulled-back metric is the
//! negative of the original: no σ-invariant compatible metric exists.
//!
//! The chart functions extend smoothly to Im z < 0 when s = 0; the
//! declared sampling domain keeps Im z ≥ 1/2 regardless, and at
//! Im z = 0 every evaluation fails with a domain error.

use crate::error::{Error, Result};
use crate::expr::{parse, Expression, COMPLEX_VARS};
use crate::field::CField;
use crate::forms::{AffineMap4, EndomorphismField, FormField, VectorFieldOnChart};
use crate::linalg::Mat4;
use crate::report::{Residual, VerificationReport};
use crate::structures::{check_phc_algebra, lee_form, structure_from_forms, FormTriple};
use crate::tol;
use num_complex::Complex64;

type C = Complex64;
type Mat4f = Mat4<f64>;

/// Construction data: integers (p, q, r), the translation parameter t,
/// the lattice matrix N, and the two real constants of the w-shear
/// generators, which no implemented check depends on (default 0).
#[derive(Clone, Debug)]
pub struct InoueParams {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub t: C,
    pub n: [[i64; 2]; 2],
    pub c: [f64; 2],
}

impl InoueParams {
    pub fn new(p: i64, q: i64, r: i64, t: C, n: [[i64; 2]; 2]) -> Self {
        InoueParams {
            p,
            q,
            r,
            t,
            n,
            c: [0.0, 0.0],
        }
    }
}

/// Derived spectral data of an Inoue parameter set.
#[derive(Clone, Debug)]
pub struct InoueSurface {
    pub params: InoueParams,
    pub alpha: f64,
    /// Unit eigenvector of N for α.
    pub a_vec: [f64; 2],
    /// Unit eigenvector of N for 1/α.
    pub b_vec: [f64; 2],
    /// s = Im t / ln α.
    pub s: f64,
    /// A = (b₁a₂ − b₂a₁)/r, the w-translation length.
    pub big_a: f64,
}

fn eigenvector(n: [[i64; 2]; 2], lambda: f64) -> Result<[f64; 2]> {
    let (n00, n01, n10, n11) = (
        n[0][0] as f64,
        n[0][1] as f64,
        n[1][0] as f64,
        n[1][1] as f64,
    );
    let v = if n[0][1] != 0 {
        [n01, lambda - n00]
    } else if n[1][0] != 0 {
        [lambda - n11, n10]
    } else {
        return Err(Error::InvalidParams {
            message: "lattice matrix is diagonal; no eigenvalue exceeds 1".into(),
        });
    };
    let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let v = [v[0] / norm, v[1] / norm];
    let residual = ((n00 * v[0] + n01 * v[1] - lambda * v[0]).powi(2)
        + (n10 * v[0] + n11 * v[1] - lambda * v[1]).powi(2))
    .sqrt();
    if residual > 1e-10 {
        return Err(Error::InvalidParams {
            message: format!("eigenvector residual {residual:.3e} for eigenvalue {lambda}"),
        });
    }
    Ok(v)
}

impl InoueSurface {
    pub fn new(params: InoueParams) -> Result<Self> {
        let n = params.n;
        let det = n[0][0] * n[1][1] - n[0][1] * n[1][0];
        if det != 1 {
            return Err(Error::InvalidParams {
                message: format!("lattice matrix must have determinant 1, got {det}"),
            });
        }
        let trace = n[0][0] + n[1][1];
        if trace <= 2 {
            return Err(Error::InvalidParams {
                message: format!(
                    "lattice matrix trace must exceed 2 for a real eigenvalue above 1, got {trace}"
                ),
            });
        }
        if params.r == 0 {
            return Err(Error::InvalidParams {
                message: "r must be nonzero".into(),
            });
        }
        let tr = trace as f64;
        let alpha = (tr + (tr * tr - 4.0).sqrt()) / 2.0;
        let a_vec = eigenvector(n, alpha)?;
        let b_vec = eigenvector(n, 1.0 / alpha)?;
        let s = params.t.im / alpha.ln();
        let big_a = (b_vec[0] * a_vec[1] - b_vec[1] * a_vec[0]) / params.r as f64;
        Ok(InoueSurface {
            params,
            alpha,
            a_vec,
            b_vec,
            s,
            big_a,
        })
    }
}

/// Sampling box: Im z in [1/2, 2], the other coordinates inside the
/// unit polydisc with margin.
pub fn inoue_domain() -> [(f64, f64); 4] {
    [(-1.0, 1.0), (0.5, 2.0), (-0.7, 0.7), (-0.7, 0.7)]
}

/// The invariant (1,0)-forms and their dual (1,0)-vector fields.
#[derive(Clone, Debug)]
pub struct InoueForms {
    pub theta1: FormField,
    pub theta2: FormField,
    pub e1: VectorFieldOnChart,
    pub e2: VectorFieldOnChart,
}

/// The para-hyperhermitian triple (Ω₁, Re Ω, Im Ω), Ω = θ₁∧θ₂, with
/// its Lee form −Im θ₁.
#[derive(Clone, Debug)]
pub struct InoueStructure {
    pub triple: FormTriple,
    pub lee: FormField,
}

pub fn inoue_forms(surface: &InoueSurface) -> Result<InoueForms> {
    let zero = Expression::constant(0.0, COMPLEX_VARS);
    let inv_y1 = parse("1/y1", COMPLEX_VARS)?;
    // Im w − s·ln Im z, the fiber part of the dual field E₁.
    let fiber = parse("y2", COMPLEX_VARS)?.sub(&parse("ln(y1)", COMPLEX_VARS)?.scale(surface.s));
    let q = fiber.div(&parse("y1", COMPLEX_VARS)?);

    let theta1 = FormField::one_form([
        CField::from_re_im(inv_y1.clone(), zero.clone()),
        CField::from_re_im(zero.clone(), inv_y1),
        CField::zero(),
        CField::zero(),
    ]);
    let theta2 = FormField::one_form([
        CField::from_re_im(q.neg(), zero.clone()),
        CField::from_re_im(zero.clone(), q.neg()),
        CField::constant_real(1.0),
        CField::constant(C::new(0.0, 1.0)),
    ]);
    let y1 = parse("y1", COMPLEX_VARS)?;
    let e1 = VectorFieldOnChart::from_comps([
        CField::from_re_im(y1.scale(0.5), zero.clone()),
        CField::from_re_im(zero.clone(), y1.scale(-0.5)),
        CField::from_re_im(fiber.scale(0.5), zero.clone()),
        CField::from_re_im(zero.clone(), fiber.scale(-0.5)),
    ]);
    let e2 = VectorFieldOnChart::from_comps([
        CField::zero(),
        CField::zero(),
        CField::constant_real(0.5),
        CField::constant(C::new(0.0, -0.5)),
    ]);
    Ok(InoueForms {
        theta1,
        theta2,
        e1,
        e2,
    })
}

pub fn inoue_structure(surface: &InoueSurface) -> Result<InoueStructure> {
    let f = inoue_forms(surface)?;
    let omega = f.theta1.wedge(&f.theta2)?;
    let omega1 = f.theta1.wedge(&f.theta2.conj())?.re();
    let lee = f.theta1.im().neg();
    Ok(InoueStructure {
        triple: FormTriple {
            omega: [omega1, omega.re(), omega.im()],
        },
        lee,
    })
}

/// Generators of the covering group as affine chart maps:
/// φ₀(z,w) = (αz, w+t), φᵢ(z,w) = (z+aᵢ, w+bᵢz+cᵢ) for i = 1, 2, and
/// φ₃(z,w) = (z, w+A).
pub fn inoue_generators(surface: &InoueSurface) -> [(String, AffineMap4); 4] {
    let alpha = surface.alpha;
    let t = surface.params.t;
    let phi0 = AffineMap4::new(
        Mat4f::from_rows([
            [alpha, 0.0, 0.0, 0.0],
            [0.0, alpha, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]),
        [0.0, 0.0, t.re, t.im],
    );
    let shear = |i: usize| {
        let (a, b, c) = (surface.a_vec[i], surface.b_vec[i], surface.params.c[i]);
        AffineMap4::new(
            Mat4f::from_rows([
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 1.0, 0.0, 0.0],
                [b, 0.0, 1.0, 0.0],
                [0.0, b, 0.0, 1.0],
            ]),
            [a, 0.0, c, 0.0],
        )
    };
    let phi3 = AffineMap4::translation([0.0, 0.0, surface.big_a, 0.0]);
    [
        ("phi0".into(), phi0),
        ("phi1".into(), shear(0)),
        ("phi2".into(), shear(1)),
        ("phi3".into(), phi3),
    ]
}

/// The involution σ(z,w) = (z,−w).
pub fn sigma_map() -> AffineMap4 {
    AffineMap4::new(
        Mat4f::from_rows([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
        ]),
        [0.0; 4],
    )
}

/// Structure-equation residuals at the samples: duality of the forms
/// and fields, the two dθ identities, dΩ = −Im θ₁∧Ω, the Lee identity
/// for all three triple members, the wedge algebra, the volume
/// identity Ω₁² = ½θ₁∧θ̄₁∧θ₂∧θ̄₂, and recovery of the Lee form from
/// the triple alone.
pub fn inoue_structure_report(
    surface: &InoueSurface,
    samples: &[[f64; 4]],
) -> Result<VerificationReport> {
    let f = inoue_forms(surface)?;
    let st = inoue_structure(surface)?;
    let mut report = VerificationReport::new("inoue-structure", 0, samples.len());

    let mut duality = Residual::new();
    for &p in samples {
        let v1 = f.e1.eval_value(p)?;
        let v2 = f.e2.eval_value(p)?;
        for (i, th) in [&f.theta1, &f.theta2].into_iter().enumerate() {
            for (j, v) in [v1, v2].into_iter().enumerate() {
                let want = if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) };
                duality.record((th.apply_at(p, &[v])? - want).norm());
            }
        }
    }
    report.check_max("duality theta_i(E_j)", duality.max, duality.mean(), tol::ALGEBRAIC);

    // dθ₁ = (i/2)θ₁∧θ̄₁ and dθ₂ = −(i/2)(θ₁∧θ₂ − θ₁∧θ̄₂ + sθ₁∧θ̄₁).
    let d1 = f
        .theta1
        .ext_d()?
        .sub(&f.theta1.wedge(&f.theta1.conj())?.scale(C::new(0.0, 0.5)));
    let rhs2 = f
        .theta1
        .wedge(&f.theta2)?
        .sub(&f.theta1.wedge(&f.theta2.conj())?)
        .add(&f.theta1.wedge(&f.theta1.conj())?.scale_re(surface.s))
        .scale(C::new(0.0, -0.5));
    let d2 = f.theta2.ext_d()?.sub(&rhs2);
    let omega = f.theta1.wedge(&f.theta2)?;
    let dom = omega.ext_d()?.sub(&st.lee.wedge(&omega)?);
    for (name, form) in [("d theta1", &d1), ("d theta2", &d2), ("d Omega", &dom)] {
        let mut res = Residual::new();
        for &p in samples {
            res.record(form.max_at(p)?);
        }
        report.check_max(name, res.max, res.mean(), tol::FIRST_DERIVATIVE);
    }

    for l in 0..3 {
        let lhs = st.triple.omega[l].ext_d()?;
        let rhs = st.lee.wedge(&st.triple.omega[l])?;
        let diff = lhs.sub(&rhs);
        let mut res = Residual::new();
        for &p in samples {
            res.record(diff.max_at(p)?);
        }
        report.check_max(
            &format!("lee identity omega{}", l + 1),
            res.max,
            res.mean(),
            tol::FIRST_DERIVATIVE,
        );
    }

    let algebra = check_phc_algebra(&st.triple, samples)?;
    for c in &algebra.checks {
        report.check_max(&c.name, c.max, c.mean, c.tol);
    }

    // Ω₁² = ½ θ₁∧θ̄₁∧θ₂∧θ̄₂.
    let vol_id = st.triple.omega[0].wedge(&st.triple.omega[0])?.sub(
        &f.theta1
            .wedge(&f.theta1.conj())?
            .wedge(&f.theta2.wedge(&f.theta2.conj())?)?
            .scale_re(0.5),
    );
    let mut res = Residual::new();
    for &p in samples {
        res.record(vol_id.max_at(p)?);
    }
    report.check_max("volume identity", res.max, res.mean(), tol::ALGEBRAIC);

    let mut lee_res = Residual::new();
    for &p in samples {
        let (theta, cross) = lee_form(&st.triple, p)?;
        let want = st.lee.eval_values(p)?;
        let mut worst = cross;
        for mu in 0..4 {
            worst = worst.max((theta[mu] - want[mu].re).abs());
        }
        lee_res.record(worst);
    }
    report.check_max(
        "lee form recovery",
        lee_res.max,
        lee_res.mean(),
        tol::FIRST_DERIVATIVE,
    );
    Ok(report)
}

/// Pullback residuals |φ*θ₁ − θ₁| and |φ*θ₂ − θ₂| for the four
/// covering-group generators.
pub fn inoue_invariance_report(
    surface: &InoueSurface,
    samples: &[[f64; 4]],
) -> Result<VerificationReport> {
    let f = inoue_forms(surface)?;
    let mut report = VerificationReport::new("inoue-invariance", 0, samples.len());
    for (name, map) in inoue_generators(surface) {
        for (label, theta) in [("theta1", &f.theta1), ("theta2", &f.theta2)] {
            let diff = map.pullback_form(theta).sub(theta);
            let mut res = Residual::new();
            for &p in samples {
                res.record(diff.max_at(p)?);
            }
            report.check_max(
                &format!("{name} {label}"),
                res.max,
                res.mean(),
                tol::FIRST_DERIVATIVE,
            );
        }
    }
    Ok(report)
}

/// The obstruction engine for the σ-quotient: σ flips the signs of
/// θ₂, Ω and all three triple members, preserves the three
/// endomorphisms, and pulls the compatible metric back to its
/// negative. A σ-invariant compatible metric would need a continuous
/// nonvanishing conformal factor f with f(σx) = −f(x), impossible on
/// a connected chart, so the quotient carries the para-hypercomplex
/// structure but no compatible metric.
pub fn sigma_obstruction_report(
    surface: &InoueSurface,
    samples: &[[f64; 4]],
) -> Result<VerificationReport> {
    if surface.params.t != C::new(0.0, 0.0) {
        return Err(Error::InvalidParams {
            message: "the involution quotient requires t = 0".into(),
        });
    }
    let f = inoue_forms(surface)?;
    let st = inoue_structure(surface)?;
    let sigma = sigma_map();
    let mut report = VerificationReport::new("inoue-sigma", 0, samples.len());

    let mut pulls: Vec<(String, FormField)> = vec![
        (
            "sigma theta1 - theta1".into(),
            sigma.pullback_form(&f.theta1).sub(&f.theta1),
        ),
        (
            "sigma theta2 + theta2".into(),
            sigma.pullback_form(&f.theta2).add(&f.theta2),
        ),
    ];
    let omega = f.theta1.wedge(&f.theta2)?;
    pulls.push((
        "sigma Omega + Omega".into(),
        sigma.pullback_form(&omega).add(&omega),
    ));
    for l in 0..3 {
        pulls.push((
            format!("sigma omega{0} + omega{0}", l + 1),
            sigma
                .pullback_form(&st.triple.omega[l])
                .add(&st.triple.omega[l]),
        ));
    }
    // σ is an involution: pulling back twice returns the original form.
    pulls.push((
        "sigma twice theta2 - theta2".into(),
        sigma
            .pullback_form(&sigma.pullback_form(&f.theta2))
            .sub(&f.theta2),
    ));
    for (name, diff) in &pulls {
        let mut res = Residual::new();
        for &p in samples {
            res.record(diff.max_at(p)?);
        }
        report.check_max(name, res.max, res.mean(), tol::ALGEBRAIC);
    }

    let mut point_res = Residual::new();
    for &p in samples {
        let q = sigma.apply(sigma.apply(p));
        point_res.record(
            (0..4)
                .map(|i| (q[i] - p[i]).abs())
                .fold(0.0f64, f64::max),
        );
    }
    report.check_max(
        "sigma twice on points",
        point_res.max,
        point_res.mean(),
        tol::EXACT,
    );

    let s = structure_from_forms(&st.triple)?;
    let pulled: [EndomorphismField; 3] = [
        sigma.pullback_endomorphism(&s.j[0])?,
        sigma.pullback_endomorphism(&s.j[1])?,
        sigma.pullback_endomorphism(&s.j[2])?,
    ];
    let pulled_g = sigma.pullback_metric(&s.g);
    let mut j_res = Residual::new();
    let mut factor_res = Residual::new();
    let mut conformal_res = Residual::new();
    for &p in samples {
        // Group the evaluations at p before the ones at σ(p): every
        // entry field shares the structure's one-slot reconstruction
        // cache, so each group costs one reconstruction.
        let g = s.g.eval_value(p)?;
        let js = [
            s.j[0].eval_real(p)?,
            s.j[1].eval_real(p)?,
            s.j[2].eval_real(p)?,
        ];
        let gs = pulled_g.eval_value(p)?;
        for i in 0..3 {
            j_res.record(pulled[i].eval_real(p)?.sub(&js[i]).max_magnitude());
        }
        let (mut bi, mut bj, mut best) = (0, 0, 0.0f64);
        for i in 0..4 {
            for j in 0..4 {
                if g.m[i][j].abs() > best {
                    best = g.m[i][j].abs();
                    bi = i;
                    bj = j;
                }
            }
        }
        let lambda = gs.m[bi][bj] / g.m[bi][bj];
        factor_res.record((lambda + 1.0).abs());
        conformal_res.record(gs.sub(&g.scale(lambda)).max_magnitude() / best);
    }
    report.check_max(
        "sigma preserves J1,J2,J3",
        j_res.max,
        j_res.mean(),
        tol::FIRST_DERIVATIVE,
    );
    report.check_max(
        "conformal factor + 1",
        factor_res.max,
        factor_res.mean(),
        tol::FIRST_DERIVATIVE,
    );
    report.check_max(
        "sigma g conformal to g",
        conformal_res.max,
        conformal_res.mean(),
        tol::FIRST_DERIVATIVE,
    );
    Ok(report)
}
