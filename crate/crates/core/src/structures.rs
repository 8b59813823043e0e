//! Almost para-hyperhermitian structures on a chart.
//!
//! A structure is a neutral metric field together with endomorphism
//! fields (J₁, J₂, J₃) obeying J₁² = −Id, J₂² = J₃² = Id, J₃ = J₁J₂,
//! J₁J₂ = −J₂J₁, with g skew-compatible: g(J₁X,J₁Y) = g(X,Y) and
//! g(J₂X,J₂Y) = g(J₃X,J₃Y) = −g(X,Y). The fundamental forms are
//! Ωᵢ(X,Y) = g(JᵢX,Y); they satisfy −Ω₁² = Ω₂² = Ω₃² and
//! Ωₗ∧Ωₘ = 0 for l ≠ m, and the structure is recoverable from the
//! triple alone. The orientation used throughout is the volume form
//! −Ω₁²/2, which makes each Ωᵢ anti-self-dual; for the flat model it
//! is exactly dx⁰∧dx¹∧dx²∧dx³.

use crate::error::{Error, Result};
use crate::field::CField;
use crate::forms::{
    merge_sign, tuple_index, tuples, EndomorphismField, FormField, MetricField,
    NijenhuisOperator, VectorFieldOnChart,
};
use crate::jet::CJet;
use crate::linalg::Mat4;
use crate::report::{Residual, VerificationReport};
use crate::splitquat::{canonical_triple, compatibility_residual, verify_triple, ParaHypercomplexTriple};
use crate::tol;
use num_complex::Complex64;
use std::sync::{Arc, Mutex};

type C = Complex64;
type Mat4f = Mat4<f64>;

/// Endomorphism square signs: J₁ is complex-type, J₂ and J₃ are
/// product-type.
pub const EPSILONS: [f64; 3] = [-1.0, 1.0, 1.0];

#[derive(Clone, Debug)]
pub struct AlmostPHStructure {
    pub g: MetricField,
    pub j: [EndomorphismField; 3],
    /// Chart box the structure is meant to be sampled on.
    pub domain: [(f64, f64); 4],
}

#[derive(Clone, Debug)]
pub struct FormTriple {
    pub omega: [FormField; 3],
}

pub const DEFAULT_DOMAIN: [(f64, f64); 4] =
    [(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)];

impl AlmostPHStructure {
    pub fn new(g: MetricField, j: [EndomorphismField; 3]) -> Self {
        AlmostPHStructure {
            g,
            j,
            domain: DEFAULT_DOMAIN,
        }
    }

    /// Constant-coefficient structure from a pointwise metric and
    /// endomorphism triple.
    pub fn from_constant(g: &Mat4f, t: &ParaHypercomplexTriple) -> Self {
        AlmostPHStructure::new(
            MetricField::from_const(g),
            [
                EndomorphismField::from_const(&t.j1),
                EndomorphismField::from_const(&t.j2),
                EndomorphismField::from_const(&t.j3),
            ],
        )
    }

    /// Max residual of the defining algebra and metric compatibility
    /// at a point, normalized by the entry scale.
    pub fn residual_at(&self, p: [f64; 4]) -> Result<f64> {
        let triple = ParaHypercomplexTriple {
            j1: self.j[0].eval_real(p)?,
            j2: self.j[1].eval_real(p)?,
            j3: self.j[2].eval_real(p)?,
        };
        let g = self.g.eval_value(p)?;
        let algebra = verify_triple(&triple).max();
        let compat = compatibility_residual(&g, &triple);
        Ok(algebra.max(compat))
    }
}

/// The canonical constant structure on flat neutral space.
pub fn canonical_structure() -> AlmostPHStructure {
    let g = Mat4f::from_rows([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
    ]);
    AlmostPHStructure::from_constant(&g, &canonical_triple())
}

/// Ωᵢ(X,Y) = g(JᵢX,Y) as form fields: coefficient on dx^μ∧dx^ν is
/// Σₐ Jᵢ[a][μ]·g[a][ν].
pub fn fundamental_forms(s: &AlmostPHStructure) -> FormTriple {
    let omega = std::array::from_fn(|i| {
        let coeffs = tuples(2)
            .iter()
            .map(|t| {
                let (mu, nu) = (t[0], t[1]);
                let mut acc = CField::zero();
                for a in 0..4 {
                    if !s.j[i].m[a][mu].is_const_zero() && !s.g.m[a][nu].is_const_zero() {
                        acc = acc.add(&s.j[i].m[a][mu].mul(&s.g.m[a][nu]));
                    }
                }
                acc
            })
            .collect();
        FormField::from_coeffs(2, coeffs)
    });
    FormTriple { omega }
}

/// Max |Ω(∂μ,∂ν) + Ω(∂ν,∂μ)| over the three would-be fundamental
/// forms at `p`; nonzero only if g and Jᵢ are incompatible.
pub fn antisymmetry_residual(s: &AlmostPHStructure, p: [f64; 4]) -> Result<f64> {
    let g = s.g.eval_value(p)?;
    let mut worst = 0.0f64;
    for i in 0..3 {
        let j = s.j[i].eval_real(p)?;
        // Ω_{μν} = Σₐ J[a][μ]·g[a][ν].
        for mu in 0..4 {
            for nu in 0..4 {
                let mut fwd = 0.0;
                let mut bwd = 0.0;
                for a in 0..4 {
                    fwd += j.m[a][mu] * g.m[a][nu];
                    bwd += j.m[a][nu] * g.m[a][mu];
                }
                worst = worst.max((fwd + bwd).abs());
            }
        }
    }
    Ok(worst)
}

/// Top-form coefficient of the wedge of two 2-forms given by their
/// increasing-pair coefficient vectors.
pub fn wedge22_top(a: &[C], b: &[C]) -> C {
    // Pairs in lex order: 01,02,03,12,13,23; merge signs +,−,+,+,−,+.
    a[0] * b[5] + a[5] * b[0] - a[1] * b[4] - a[4] * b[1] + a[2] * b[3] + a[3] * b[2]
}

/// Pointwise square/mixed-wedge data of a form triple.
struct PhcWedges {
    squares: [C; 3],
    mixed: [C; 3],
    scale: f64,
}

fn phc_wedges(f: &FormTriple, p: [f64; 4]) -> Result<PhcWedges> {
    let v: [Vec<C>; 3] = [
        f.omega[0].eval_values(p)?,
        f.omega[1].eval_values(p)?,
        f.omega[2].eval_values(p)?,
    ];
    let squares = std::array::from_fn(|i| wedge22_top(&v[i], &v[i]));
    let mixed = [
        wedge22_top(&v[0], &v[1]),
        wedge22_top(&v[0], &v[2]),
        wedge22_top(&v[1], &v[2]),
    ];
    let scale = squares
        .iter()
        .fold(0.0f64, |m, s| m.max(s.norm()))
        .max(1.0);
    Ok(PhcWedges {
        squares,
        mixed,
        scale,
    })
}

/// Residuals of the algebraic characterization −Ω₁² = Ω₂² = Ω₃²,
/// Ωₗ∧Ωₘ = 0, as top-form coefficients normalized by the square scale.
pub fn check_phc_algebra(f: &FormTriple, samples: &[[f64; 4]]) -> Result<VerificationReport> {
    let mut opposite = Residual::new();
    let mut equal = Residual::new();
    let mut mixed = [Residual::new(), Residual::new(), Residual::new()];
    for &p in samples {
        let w = phc_wedges(f, p)?;
        opposite.record((w.squares[0] + w.squares[1]).norm() / w.scale);
        equal.record((w.squares[1] - w.squares[2]).norm() / w.scale);
        for k in 0..3 {
            mixed[k].record(w.mixed[k].norm() / w.scale);
        }
    }
    let mut report = VerificationReport::new("phc-algebra", 0, samples.len());
    report.check_max(
        "omega1^2 + omega2^2",
        opposite.max,
        opposite.mean(),
        tol::ALGEBRAIC,
    );
    report.check_max(
        "omega2^2 - omega3^2",
        equal.max,
        equal.mean(),
        tol::ALGEBRAIC,
    );
    let names = ["omega1 ^ omega2", "omega1 ^ omega3", "omega2 ^ omega3"];
    for k in 0..3 {
        report.check_max(names[k], mixed[k].max, mixed[k].mean(), tol::ALGEBRAIC);
    }
    Ok(report)
}

/// The orientation declared by the triple: vol = −Ω₁²/2. For the
/// canonical flat structure this is exactly dx⁰∧dx¹∧dx²∧dx³, and each
/// Ωᵢ is anti-self-dual with respect to it.
pub fn phk_volume(f: &FormTriple) -> Result<FormField> {
    Ok(f.omega[0]
        .wedge(&f.omega[0])?
        .scale(C::new(-0.5, 0.0)))
}

/// Solve dΩ₁ = θ∧Ω₁ for θ at `p` and cross-check θ∧Ωₗ = dΩₗ for
/// l = 2, 3. Returns the covector components and the worst
/// cross-check discrepancy.
pub fn lee_form(f: &FormTriple, p: [f64; 4]) -> Result<([f64; 4], f64)> {
    // Coefficient matrix of θ ↦ θ∧Ω over the 3-form basis.
    let wedge_matrix = |omega: &[C]| -> Mat4f {
        let mut m = Mat4f::zeros();
        for (ti, t) in tuples(3).iter().enumerate() {
            for mu in 0..4 {
                if !t.contains(&mu) {
                    continue;
                }
                let rest: Vec<usize> = t.iter().copied().filter(|&v| v != mu).collect();
                let (_, sign) = merge_sign(&[mu], &rest).unwrap();
                m.m[ti][mu] += sign * omega[tuple_index(2, &rest)].re;
            }
        }
        m
    };
    let mut omegas = Vec::with_capacity(3);
    let mut ds = Vec::with_capacity(3);
    let mut scale = 1.0f64;
    for l in 0..3 {
        let v = f.omega[l].eval_values(p)?;
        for c in &v {
            if c.im.abs() > tol::FIRST_DERIVATIVE * c.norm().max(1.0) {
                return Err(Error::Incompatible {
                    message: "fundamental form has a complex coefficient".into(),
                });
            }
            scale = scale.max(c.norm());
        }
        let d = f.omega[l].ext_d()?.eval_values(p)?;
        omegas.push(v);
        ds.push(d);
    }
    let m1 = wedge_matrix(&omegas[0]);
    let rhs: [f64; 4] = std::array::from_fn(|ti| ds[0][ti].re);
    let theta = m1.solve(rhs).map_err(|_| Error::Degenerate {
        what: "fundamental form degenerates; Lee system is singular".into(),
    })?;
    let mut worst = 0.0f64;
    for l in 1..3 {
        let ml = wedge_matrix(&omegas[l]);
        let prod = ml.matvec(theta);
        for ti in 0..4 {
            worst = worst.max((prod[ti] - ds[l][ti].re).abs());
        }
    }
    if worst > tol::FIRST_DERIVATIVE * scale {
        return Err(Error::NotParaHyperhermitian {
            message: format!(
                "Lee form of omega1 fails on omega2/omega3 by {worst:.3e}"
            ),
        });
    }
    Ok((theta, worst))
}

/// Closedness of all three forms plus the algebraic characterization:
/// the hypersymplectic certificate.
pub fn hypersymplectic_check(
    f: &FormTriple,
    samples: &[[f64; 4]],
) -> Result<VerificationReport> {
    let mut report = check_phc_algebra(f, samples)?;
    report.suite = "hypersymplectic".into();
    let d: [FormField; 3] = [
        f.omega[0].ext_d()?,
        f.omega[1].ext_d()?,
        f.omega[2].ext_d()?,
    ];
    for l in 0..3 {
        let mut res = Residual::new();
        for &p in samples {
            res.record(d[l].max_at(p)?);
        }
        report.check_max(
            &format!("d omega{}", l + 1),
            res.max,
            res.mean(),
            tol::FIRST_DERIVATIVE,
        );
    }
    Ok(report)
}

/// Max Nijenhuis component of each Jᵢ over coordinate-field pairs and
/// samples; vanishing certifies para-hypercomplex integrability.
pub fn integrability_report(
    s: &AlmostPHStructure,
    samples: &[[f64; 4]],
) -> Result<VerificationReport> {
    let coords: [VectorFieldOnChart; 4] = std::array::from_fn(VectorFieldOnChart::coordinate);
    let mut report = VerificationReport::new("integrability", 0, samples.len());
    for i in 0..3 {
        let mut ops = Vec::new();
        for a in 0..4 {
            for b in (a + 1)..4 {
                ops.push(NijenhuisOperator::new(
                    &s.j[i],
                    EPSILONS[i],
                    &coords[a],
                    &coords[b],
                )?);
            }
        }
        let mut res = Residual::new();
        for &p in samples {
            for op in &ops {
                let n = op.eval(p)?;
                for c in n {
                    res.record(c.norm());
                }
            }
        }
        report.check_max(
            &format!("nijenhuis J{}", i + 1),
            res.max,
            res.mean(),
            tol::CURVATURE,
        );
    }
    Ok(report)
}

/// Pointwise reconstruction kernel: J₁ = (Ω₃♭)⁻¹∘Ω₂♭,
/// g(X,Y) = Ω₁(X,J₁Y), J₂ = (g♭)⁻¹∘Ω₂♭, J₃ = J₁J₂, where ♭ lowers the
/// first slot (matrix Ωᵀ). The sign of J₁ is the one that makes the
/// roundtrip through `fundamental_forms` the identity on the flat
/// model.
fn reconstruct_at(f: &FormTriple, p: [f64; 4]) -> Result<(Mat4<CJet>, [Mat4<CJet>; 3])> {
    let w = phc_wedges(f, p)?;
    let tolerance = tol::CURVATURE * w.scale;
    if (w.squares[0] + w.squares[1]).norm() > tolerance
        || (w.squares[1] - w.squares[2]).norm() > tolerance
        || w.mixed.iter().any(|m| m.norm() > tolerance)
    {
        return Err(Error::NotParaHyperhermitian {
            message: format!(
                "form triple violates the wedge characterization at {p:?}"
            ),
        });
    }
    let o1 = f.omega[0].two_form_matrix_at(p)?;
    let o2 = f.omega[1].two_form_matrix_at(p)?;
    let o3 = f.omega[2].two_form_matrix_at(p)?;
    let b2 = o2.transpose();
    let b3 = o3.transpose();
    let j1 = b3
        .inverse()
        .map_err(|_| Error::Degenerate {
            what: format!("omega3 degenerates at {p:?}"),
        })?
        .mul(&b2);
    // g_{μν} = Ω₁(∂μ, J₁∂ν) = Σₐ Ω₁[μ][a]·J₁[a][ν].
    let g = o1.mul(&j1);
    let j2 = g
        .inverse()
        .map_err(|_| Error::Degenerate {
            what: format!("reconstructed metric degenerates at {p:?}"),
        })?
        .mul(&o2.transpose());
    let j3 = j1.mul(&j2);
    Ok((g, [j1, j2, j3]))
}

/// Rebuild the structure a form triple came from. Every field
/// evaluation re-derives the pointwise data from the forms, so jets
/// propagate through the reconstruction and the result can feed the
/// curvature stack directly. Consumers read the result entry by entry
/// at a common point, so the last reconstruction is kept in a
/// one-slot cache shared by all 64 entry fields.
pub fn structure_from_forms(f: &FormTriple) -> Result<AlmostPHStructure> {
    type Reconstruction = (Mat4<CJet>, [Mat4<CJet>; 3]);
    type Cache = Mutex<Option<([f64; 4], Reconstruction)>>;
    fn lookup(f: &FormTriple, cache: &Cache, p: [f64; 4]) -> Result<Reconstruction> {
        let mut slot = cache.lock().expect("reconstruction cache poisoned");
        if let Some((q, data)) = slot.as_ref() {
            if *q == p {
                return Ok(data.clone());
            }
        }
        let data = reconstruct_at(f, p)?;
        *slot = Some((p, data.clone()));
        Ok(data)
    }
    let order = f
        .omega
        .iter()
        .map(|o| o.min_order())
        .min()
        .unwrap_or(0)
        .min(2);
    let shared = Arc::new(f.clone());
    let cache: Arc<Cache> = Arc::new(Mutex::new(None));
    let gm = std::array::from_fn(|r| {
        std::array::from_fn(|c| {
            let f = shared.clone();
            let cache = cache.clone();
            CField::from_jet_fn(order, move |p| Ok(lookup(&f, &cache, p)?.0.m[r][c]))
        })
    });
    let jm = |i: usize| -> [[CField; 4]; 4] {
        std::array::from_fn(|r| {
            std::array::from_fn(|c| {
                let f = shared.clone();
                let cache = cache.clone();
                CField::from_jet_fn(order, move |p| Ok(lookup(&f, &cache, p)?.1[i].m[r][c]))
            })
        })
    };
    // Validate once at the domain center so structurally bad triples
    // fail at construction, not first use.
    let probe = [0.0; 4];
    if let Err(e) = reconstruct_at(f, probe) {
        match e {
            // A center that happens to be outside the triple's domain
            // (evaluation error) is tolerated; algebra violations and
            // degeneracies are not.
            Error::NotParaHyperhermitian { .. } | Error::Degenerate { .. } => return Err(e),
            _ => {}
        }
    }
    Ok(AlmostPHStructure::new(
        MetricField::from_fields(gm),
        [
            EndomorphismField::from_fields(jm(0)),
            EndomorphismField::from_fields(jm(1)),
            EndomorphismField::from_fields(jm(2)),
        ],
    ))
}

/// Max entrywise difference between two structures at `p`, over the
/// metric and all three endomorphisms.
pub fn structure_distance(
    a: &AlmostPHStructure,
    b: &AlmostPHStructure,
    p: [f64; 4],
) -> Result<f64> {
    let mut worst = a
        .g
        .eval_value(p)?
        .sub(&b.g.eval_value(p)?)
        .max_magnitude();
    for i in 0..3 {
        let d = a.j[i]
            .eval_real(p)?
            .sub(&b.j[i].eval_real(p)?)
            .max_magnitude();
        worst = worst.max(d);
    }
    Ok(worst)
}
