//! Levi-Civita connection and curvature of neutral metrics on a chart.
//!
//! Sign conventions, fixed so that the round sphere has positive
//! scalar curvature:
//!
//! * R(X,Y)Z = ∇ₓ∇ᵧZ − ∇ᵧ∇ₓZ − ∇₍ₓ,ᵧ₎Z, with components
//!   R^l_{ijk} ∂ₗ = R(∂ᵢ,∂ⱼ)∂ₖ;
//! * the (0,4)-tensor lowers the output slot into the third index,
//!   Rm_{ijkl} = g(R(∂ᵢ,∂ⱼ)∂ₗ, ∂ₖ), so space forms of sectional
//!   curvature K satisfy Rm = (K/2)·g∧g (Kulkarni–Nomizu square);
//! * Ric_{jk} = R^i_{ijk} and s = g^{jk}Ric_{jk}, giving s = +12 for
//!   the unit round 4-sphere.
//!
//! The Weyl part follows the dimension-4 decomposition
//! Rm = C + ½·E∧g + (s/24)·g∧g with E the trace-free Ricci tensor,
//! and is split into the self-dual and anti-self-dual blocks W± of the
//! induced operator on Λ² by the projectors (Id ± ★)/2. The star is
//! normalized against √det g with the sign of the supplied orientation
//! form, which keeps ★★ = Id on Λ² in both the Riemannian and the
//! neutral case.
//!
//! Metric entries must be 2-jet-evaluable: second derivatives of the
//! metric reach the curvature through exact jets, never differencing.

use crate::error::{Error, Result};
use crate::forms::{star2_matrix, tuples, FormField, MetricField};
use crate::jet::Jet;
use crate::linalg::Mat4;
use crate::report::{Residual, VerificationReport};
use crate::tol;

type Mat4f = Mat4<f64>;

/// Γ[k][i][j] = Γ^k_{ij}.
pub type Christoffel = [[[f64; 4]; 4]; 4];
/// R[l][i][j][k] = R^l_{ijk}, the component of R(∂ᵢ,∂ⱼ)∂ₖ along ∂ₗ.
pub type Riemann = [[[[f64; 4]; 4]; 4]; 4];
/// T[i][j][k][l] = Rm_{ijkl}; antisymmetric in (i,j) and (k,l),
/// symmetric under pair exchange.
pub type Riemann0 = [[[[f64; 4]; 4]; 4]; 4];

/// Pointwise curvature data of a metric.
#[derive(Clone, Debug)]
pub struct CurvatureAtPoint {
    pub christoffel: Christoffel,
    pub riemann: Riemann,
    pub riemann_lowered: Riemann0,
    pub ricci: Mat4f,
    pub scalar: f64,
    /// Weyl (0,4)-tensor in the same index layout as `riemann_lowered`.
    pub weyl: Riemann0,
    /// Metric value, kept for raising indices downstream.
    pub metric: Mat4f,
    pub metric_inv: Mat4f,
}

/// Christoffel symbols carrying first derivatives: the value and
/// gradient slots of each jet are valid, the Hessian slot is not.
fn christoffel_jets(g: &MetricField, p: [f64; 4]) -> Result<[[[Jet; 4]; 4]; 4]> {
    let jets = g.eval_real_jets(p)?;
    let ginv = jets.inverse()?;
    // dg[i].m[j][l] = ∂ᵢ g_{jl} as an order-1 jet.
    let dg: [Mat4<Jet>; 4] = std::array::from_fn(|i| {
        let mut m = Mat4::<Jet>::zeros();
        for j in 0..4 {
            for l in 0..4 {
                m.m[j][l] = jets.m[j][l].derivative(i);
            }
        }
        m
    });
    let half = Jet::constant(0.5);
    let mut gamma = [[[Jet::constant(0.0); 4]; 4]; 4];
    for k in 0..4 {
        for i in 0..4 {
            for j in i..4 {
                let mut acc = Jet::constant(0.0);
                for l in 0..4 {
                    let sym = dg[i].m[j][l] + dg[j].m[i][l] - dg[l].m[i][j];
                    acc = acc + ginv.m[k][l] * sym;
                }
                let v = half * acc;
                gamma[k][i][j] = v;
                gamma[k][j][i] = v;
            }
        }
    }
    Ok(gamma)
}

/// Γ^k_{ij} = ½ g^{kl} (∂ᵢg_{jl} + ∂ⱼg_{il} − ∂ₗg_{ij}).
pub fn christoffel(g: &MetricField, p: [f64; 4]) -> Result<Christoffel> {
    let jets = christoffel_jets(g, p)?;
    Ok(std::array::from_fn(|k| {
        std::array::from_fn(|i| std::array::from_fn(|j| jets[k][i][j].v))
    }))
}

/// Kulkarni–Nomizu product of symmetric 4×4 tensors in the
/// `riemann_lowered` index layout.
fn kulkarni_nomizu(a: &Mat4f, b: &Mat4f) -> Riemann0 {
    let mut t = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    t[i][j][k][l] = a.m[i][k] * b.m[j][l] + a.m[j][l] * b.m[i][k]
                        - a.m[i][l] * b.m[j][k]
                        - a.m[j][k] * b.m[i][l];
                }
            }
        }
    }
    t
}

/// Full curvature package at a point.
pub fn curvature_at(g: &MetricField, p: [f64; 4]) -> Result<CurvatureAtPoint> {
    let gamma = christoffel_jets(g, p)?;
    let gv = g.eval_value(p)?;
    let ginv = gv.inverse()?;

    let mut riemann = [[[[0.0; 4]; 4]; 4]; 4];
    for l in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let mut v = gamma[l][j][k].g[i] - gamma[l][i][k].g[j];
                    for m in 0..4 {
                        v += gamma[l][i][m].v * gamma[m][j][k].v
                            - gamma[l][j][m].v * gamma[m][i][k].v;
                    }
                    riemann[l][i][j][k] = v;
                }
            }
        }
    }

    // Rm_{ijkl} = g_{km} R^m_{ijl}: output slot lowered into the third
    // index, so space forms come out with positive sectional curvature.
    let mut lowered = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let mut v = 0.0;
                    for m in 0..4 {
                        v += gv.m[k][m] * riemann[m][i][j][l];
                    }
                    lowered[i][j][k][l] = v;
                }
            }
        }
    }

    let mut ricci = Mat4f::zeros();
    for j in 0..4 {
        for k in 0..4 {
            let mut v = 0.0;
            for i in 0..4 {
                v += riemann[i][i][j][k];
            }
            ricci.m[j][k] = v;
        }
    }
    let mut scalar = 0.0;
    for j in 0..4 {
        for k in 0..4 {
            scalar += ginv.m[j][k] * ricci.m[j][k];
        }
    }

    // Weyl = Rm − ½·E∧g − (s/24)·g∧g with E the trace-free Ricci part.
    let e = ricci.sub(&gv.scale(scalar / 4.0));
    let eg = kulkarni_nomizu(&e, &gv);
    let gg = kulkarni_nomizu(&gv, &gv);
    let mut weyl = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    weyl[i][j][k][l] = lowered[i][j][k][l]
                        - 0.5 * eg[i][j][k][l]
                        - scalar / 24.0 * gg[i][j][k][l];
                }
            }
        }
    }

    Ok(CurvatureAtPoint {
        christoffel: std::array::from_fn(|k| {
            std::array::from_fn(|i| std::array::from_fn(|j| gamma[k][i][j].v))
        }),
        riemann,
        riemann_lowered: lowered,
        ricci,
        scalar,
        weyl,
        metric: gv,
        metric_inv: ginv,
    })
}

pub fn riemann(g: &MetricField, p: [f64; 4]) -> Result<Riemann> {
    Ok(curvature_at(g, p)?.riemann)
}

pub fn ricci(g: &MetricField, p: [f64; 4]) -> Result<(Mat4f, f64)> {
    let c = curvature_at(g, p)?;
    Ok((c.ricci, c.scalar))
}

fn max4(t: &Riemann0) -> f64 {
    let mut m = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    m = m.max(t[i][j][k][l].abs());
                }
            }
        }
    }
    m
}

/// Self-dual and anti-self-dual Weyl blocks.
#[derive(Clone, Debug)]
pub struct WeylSplit {
    /// W⁺ in the basis dx⁰∧dxᴬ + ★(dx⁰∧dxᴬ), A = 1,2,3.
    pub plus: [[f64; 3]; 3],
    /// W⁻ in the basis dx⁰∧dxᴬ − ★(dx⁰∧dxᴬ).
    pub minus: [[f64; 3]; 3],
    /// Largest entry of the projected 6×6 operator P₊·Ŵ·P₊.
    pub plus_max: f64,
    /// Largest entry of P₋·Ŵ·P₋.
    pub minus_max: f64,
}

/// Orientation sign and normalized volume coefficient √det g at `p`.
fn orientation_omega(g: &Mat4f, orientation: &FormField, p: [f64; 4]) -> Result<f64> {
    assert_eq!(orientation.degree, 4);
    let c = orientation.coeffs[0].eval_value(p)?;
    if c.im.abs() > tol::FIRST_DERIVATIVE * c.norm().max(1.0) {
        return Err(Error::Incompatible {
            message: "orientation form has a complex coefficient".into(),
        });
    }
    if c.re == 0.0 {
        return Err(Error::Degenerate {
            what: "orientation form vanishes at the sample point".into(),
        });
    }
    let det = g.det();
    if det <= 0.0 {
        return Err(Error::Degenerate {
            what: format!("metric determinant {det:.3e} admits no unit volume form"),
        });
    }
    Ok(c.re.signum() * det.sqrt())
}

/// 6×6 matrix of the curvature-type operator induced by a (0,4)-tensor
/// with Riemann symmetries on the increasing-pair basis of Λ²:
/// M[S][T] = Σ_{k,l} C_{s₀s₁kl} g^{k t₀} g^{l t₁}.
fn lambda2_operator(c: &Riemann0, ginv: &Mat4f) -> [[f64; 6]; 6] {
    let mut m = [[0.0; 6]; 6];
    for (si, s) in tuples(2).iter().enumerate() {
        for (ti, t) in tuples(2).iter().enumerate() {
            let mut v = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    v += c[s[0]][s[1]][k][l] * ginv.m[k][t[0]] * ginv.m[l][t[1]];
                }
            }
            m[si][ti] = v;
        }
    }
    m
}

fn mat6_mul(a: &[[f64; 6]; 6], b: &[[f64; 6]; 6]) -> [[f64; 6]; 6] {
    let mut out = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            for k in 0..6 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn mat6_max(a: &[[f64; 6]; 6]) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Orthonormal basis of a rank-3 projector's range, chosen by pivoted
/// Gram-Schmidt over its columns so the selection stays well
/// conditioned whichever columns carry the range.
fn projector_basis(proj: &[[f64; 6]; 6]) -> Result<[[f64; 6]; 3]> {
    let mut basis: Vec<[f64; 6]> = Vec::new();
    while basis.len() < 3 {
        let mut best: Option<[f64; 6]> = None;
        let mut best_norm = 0.0;
        for a in 0..6 {
            let mut r: [f64; 6] = std::array::from_fn(|k| proj[k][a]);
            for b in &basis {
                let d: f64 = (0..6).map(|k| r[k] * b[k]).sum();
                for k in 0..6 {
                    r[k] -= d * b[k];
                }
            }
            let n = (0..6).map(|k| r[k] * r[k]).sum::<f64>().sqrt();
            if n > best_norm {
                best_norm = n;
                best = Some(std::array::from_fn(|k| r[k] / n));
            }
        }
        match best {
            Some(b) if best_norm > tol::RANK_PIVOT => basis.push(b),
            _ => {
                return Err(Error::Degenerate {
                    what: "degenerate self-dual basis at the sample point".into(),
                })
            }
        }
    }
    Ok([basis[0], basis[1], basis[2]])
}

/// Express the operator `op` restricted to the span of the three
/// basis columns as a 3×3 matrix by least squares.
fn restrict_to_basis(op: &[[f64; 6]; 6], basis: &[[f64; 6]; 3]) -> Result<[[f64; 3]; 3]> {
    // Normal matrix N^T N, embedded into a 4×4 solve.
    let mut ntn = Mat4f::identity();
    for a in 0..3 {
        for b in 0..3 {
            let mut v = 0.0;
            for r in 0..6 {
                v += basis[a][r] * basis[b][r];
            }
            ntn.m[a][b] = v;
        }
    }
    ntn.m[3][3] = 1.0;
    for a in 0..3 {
        ntn.m[a][3] = 0.0;
        ntn.m[3][a] = 0.0;
    }
    let mut out = [[0.0; 3]; 3];
    for col in 0..3 {
        let mut image = [0.0; 6];
        for r in 0..6 {
            for k in 0..6 {
                image[r] += op[r][k] * basis[col][k];
            }
        }
        let mut rhs = [0.0; 4];
        for a in 0..3 {
            for r in 0..6 {
                rhs[a] += basis[a][r] * image[r];
            }
        }
        let x = ntn.solve(rhs).map_err(|_| Error::Degenerate {
            what: "degenerate self-dual basis at the sample point".into(),
        })?;
        for a in 0..3 {
            out[a][col] = x[a];
        }
    }
    Ok(out)
}

/// Weyl operator split into the self-dual and anti-self-dual blocks of
/// Λ² for the orientation singled out by the given volume form.
pub fn weyl_split(
    g: &MetricField,
    orientation: &FormField,
    p: [f64; 4],
) -> Result<WeylSplit> {
    let c = curvature_at(g, p)?;
    let omega = orientation_omega(&c.metric, orientation, p)?;
    let star = star2_matrix(&c.metric_inv, omega);
    let what = lambda2_operator(&c.weyl, &c.metric_inv);

    let mut proj_plus = [[0.0; 6]; 6];
    let mut proj_minus = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            let id = if i == j { 1.0 } else { 0.0 };
            proj_plus[i][j] = 0.5 * (id + star[i][j]);
            proj_minus[i][j] = 0.5 * (id - star[i][j]);
        }
    }
    let wp = mat6_mul(&proj_plus, &mat6_mul(&what, &proj_plus));
    let wm = mat6_mul(&proj_minus, &mat6_mul(&what, &proj_minus));

    let plus = restrict_to_basis(&wp, &projector_basis(&proj_plus)?)?;
    let minus = restrict_to_basis(&wm, &projector_basis(&proj_minus)?)?;

    Ok(WeylSplit {
        plus,
        minus,
        plus_max: mat6_max(&wp),
        minus_max: mat6_max(&wm),
    })
}

/// Aggregate curvature magnitudes over sample points and flag the
/// flat, Ricci-flat, scalar-flat and self-dual properties at the
/// tolerance ladder. The flags are descriptive: a clear flag does not
/// fail the report.
pub fn curvature_report(
    g: &MetricField,
    orientation: &FormField,
    samples: &[[f64; 4]],
) -> Result<VerificationReport> {
    let mut riem = Residual::new();
    let mut ric = Residual::new();
    let mut sc = Residual::new();
    let mut wminus = Residual::new();
    let mut wplus = Residual::new();
    for &p in samples {
        let c = curvature_at(g, p)?;
        riem.record(max4(&c.riemann_lowered));
        ric.record(c.ricci.max_magnitude());
        sc.record(c.scalar);
        let w = weyl_split(g, orientation, p)?;
        wminus.record(w.minus_max);
        wplus.record(w.plus_max);
    }
    let mut report = VerificationReport::new("curvature", 0, samples.len());
    report.flag("flat |Rm|", riem.max, riem.mean(), tol::CURVATURE);
    report.flag("ricci-flat |Ric|", ric.max, ric.mean(), tol::CURVATURE);
    report.flag("scalar-flat |s|", sc.max, sc.mean(), tol::CURVATURE);
    report.flag("self-dual |W-|", wminus.max, wminus.mean(), tol::CURVATURE);
    report.flag("anti-self-dual |W+|", wplus.max, wplus.mean(), tol::CURVATURE);
    Ok(report)
}

/// Residual of ∇g at a point: ∂ᵢg_{jk} − Γ^m_{ij}g_{mk} − Γ^m_{ik}g_{jm}.
pub fn metric_compatibility_residual(g: &MetricField, p: [f64; 4]) -> Result<f64> {
    let jets = g.eval_real_jets(p)?;
    let gamma = christoffel(g, p)?;
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let mut v = jets.m[j][k].g[i];
                for m in 0..4 {
                    v -= gamma[m][i][j] * jets.m[m][k].v + gamma[m][i][k] * jets.m[j][m].v;
                }
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// Max residuals of the Riemann symmetries and the first Bianchi
/// identity of `riemann_lowered`, normalized by the largest entry.
pub fn symmetry_residual(c: &CurvatureAtPoint) -> f64 {
    let t = &c.riemann_lowered;
    let scale = max4(t).max(1.0);
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    worst = worst.max((t[i][j][k][l] + t[j][i][k][l]).abs());
                    worst = worst.max((t[i][j][k][l] + t[i][j][l][k]).abs());
                    worst = worst.max((t[i][j][k][l] - t[k][l][i][j]).abs());
                    // First Bianchi: cyclic sum over the 2-form slots
                    // and the argument slot of R(∂ᵢ,∂ⱼ)∂ₗ.
                    let b = t[i][j][k][l] + t[j][l][k][i] + t[l][i][k][j];
                    worst = worst.max(b.abs());
                }
            }
        }
    }
    worst / scale
}

/// Residual of the contracted second Bianchi identity div Ric = ½ ds,
/// with the divergence assembled from central differences of Ricci.
pub fn contracted_bianchi_residual(g: &MetricField, p: [f64; 4], step: f64) -> Result<f64> {
    let c = curvature_at(g, p)?;
    // ∂ᵢ Ric and ∂ᵢ s by central differences.
    let mut dric = [Mat4f::zeros(); 4];
    let mut ds = [0.0; 4];
    for i in 0..4 {
        let mut pp = p;
        pp[i] += step;
        let mut pm = p;
        pm[i] -= step;
        let (rp, sp) = ricci(g, pp)?;
        let (rm, sm) = ricci(g, pm)?;
        dric[i] = rp.sub(&rm).scale(1.0 / (2.0 * step));
        ds[i] = (sp - sm) / (2.0 * step);
    }
    let mut worst = 0.0f64;
    for k in 0..4 {
        // (div Ric)_k = g^{ij} ∇ᵢ Ric_{jk}.
        let mut div = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let mut nabla = dric[i].m[j][k];
                for m in 0..4 {
                    nabla -= c.christoffel[m][i][j] * c.ricci.m[m][k]
                        + c.christoffel[m][i][k] * c.ricci.m[j][m];
                }
                div += c.metric_inv.m[i][j] * nabla;
            }
        }
        worst = worst.max((div - 0.5 * ds[k]).abs());
    }
    Ok(worst)
}

/// Anti-self-dual projection of a 2-form's coefficient vector under
/// the star fixed by (g, orientation) at `p`; used to certify which
/// side of Λ² a form lives on.
pub fn asd_residual(
    alpha: &FormField,
    g: &MetricField,
    orientation: &FormField,
    p: [f64; 4],
) -> Result<f64> {
    assert_eq!(alpha.degree, 2);
    let gv = g.eval_value(p)?;
    let ginv = gv.inverse()?;
    let omega = orientation_omega(&gv, orientation, p)?;
    let star = star2_matrix(&ginv, omega);
    let coeffs = alpha.eval_values(p)?;
    let mut worst = 0.0f64;
    for u in 0..6 {
        let mut starred = num_complex::Complex64::new(0.0, 0.0);
        for t in 0..6 {
            starred += star[u][t] * coeffs[t];
        }
        worst = worst.max((starred + coeffs[u]).norm());
    }
    Ok(worst)
}
