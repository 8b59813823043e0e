//! Exterior calculus on a four-dimensional chart.
//!
//! Forms store one complex scalar field per strictly increasing index
//! tuple, so antisymmetry is structural. Degree is bounded by 4.
//! Operations cover wedge, exterior derivative, Lie bracket, interior
//! evaluation on complex vectors, the Hodge star of a (possibly
//! neutral) metric against a declared volume form, Nijenhuis tensors
//! of endomorphism fields, and pullbacks along affine chart maps.

use crate::error::{Error, Result};
use crate::field::CField;
use crate::jet::{CJet, Jet};
use crate::linalg::Mat4;
use crate::scalar::Scalar;
use crate::tol;
use num_complex::Complex64;
use std::sync::Arc;

type C = Complex64;

// ---------------------------------------------------------------------
// Increasing index tuples
// ---------------------------------------------------------------------

const T0: [&[usize]; 1] = [&[]];
const T1: [&[usize]; 4] = [&[0], &[1], &[2], &[3]];
const T2: [&[usize]; 6] = [&[0, 1], &[0, 2], &[0, 3], &[1, 2], &[1, 3], &[2, 3]];
const T3: [&[usize]; 4] = [&[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3]];
const T4: [&[usize]; 1] = [&[0, 1, 2, 3]];

/// Strictly increasing index tuples of length `k`, in lexicographic
/// order; the coefficient layout of every `FormField`.
pub fn tuples(k: usize) -> &'static [&'static [usize]] {
    match k {
        0 => &T0,
        1 => &T1,
        2 => &T2,
        3 => &T3,
        4 => &T4,
        _ => panic!("form degree {k} out of range"),
    }
}

/// Number of coefficients of a degree-`k` form.
pub fn form_dim(k: usize) -> usize {
    tuples(k).len()
}

pub fn tuple_index(k: usize, t: &[usize]) -> usize {
    tuples(k)
        .iter()
        .position(|&s| s == t)
        .expect("tuple not in increasing order")
}

/// Complement of an increasing tuple inside {0,1,2,3}.
pub fn complement(t: &[usize]) -> Vec<usize> {
    (0..4).filter(|i| !t.contains(i)).collect()
}

/// Merge two increasing tuples; the sign counts the transpositions
/// needed to sort the concatenation. `None` when an index repeats.
pub fn merge_sign(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut inversions = 0usize;
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i >= a.len() || b[j] < a[i] {
            // b[j] jumps over the a-elements not yet emitted.
            inversions += a.len() - i;
            out.push(b[j]);
            j += 1;
        } else {
            return None;
        }
    }
    let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
    Some((out, sign))
}

/// Determinant of the k×k submatrix `get(row, col)`, k ≤ 4.
fn small_det<S: Scalar>(n: usize, get: &dyn Fn(usize, usize) -> S) -> S {
    match n {
        0 => S::one(),
        1 => get(0, 0),
        2 => get(0, 0) * get(1, 1) - get(0, 1) * get(1, 0),
        _ => {
            // Laplace expansion along the first row.
            let mut acc = S::zero();
            for c in 0..n {
                let minor = |r: usize, cc: usize| {
                    let col = if cc < c { cc } else { cc + 1 };
                    get(r + 1, col)
                };
                let term = get(0, c) * small_det(n - 1, &minor);
                acc = if c % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
    }
}

// ---------------------------------------------------------------------
// Form fields
// ---------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct FormField {
    pub degree: usize,
    /// One coefficient per increasing tuple, in `tuples(degree)` order.
    pub coeffs: Vec<CField>,
}

impl FormField {
    pub fn zero(degree: usize) -> Self {
        FormField {
            degree,
            coeffs: vec![CField::zero(); form_dim(degree)],
        }
    }

    pub fn from_coeffs(degree: usize, coeffs: Vec<CField>) -> Self {
        assert_eq!(coeffs.len(), form_dim(degree));
        FormField { degree, coeffs }
    }

    /// Degree-0 form.
    pub fn scalar(f: CField) -> Self {
        FormField {
            degree: 0,
            coeffs: vec![f],
        }
    }

    /// Coordinate 1-form dx^i.
    pub fn dx(i: usize) -> Self {
        let mut coeffs = vec![CField::zero(); 4];
        coeffs[i] = CField::constant_real(1.0);
        FormField { degree: 1, coeffs }
    }

    pub fn one_form(coeffs: [CField; 4]) -> Self {
        FormField {
            degree: 1,
            coeffs: coeffs.into(),
        }
    }

    pub fn coeff(&self, t: &[usize]) -> &CField {
        &self.coeffs[tuple_index(self.degree, t)]
    }

    pub fn add(&self, rhs: &FormField) -> FormField {
        assert_eq!(self.degree, rhs.degree);
        FormField {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &FormField) -> FormField {
        assert_eq!(self.degree, rhs.degree);
        FormField {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn neg(&self) -> FormField {
        self.scale(C::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: C) -> FormField {
        FormField {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> FormField {
        self.scale(C::new(s, 0.0))
    }

    pub fn scale_field(&self, f: &CField) -> FormField {
        FormField {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|a| f.mul(a)).collect(),
        }
    }

    /// Coefficient-wise conjugate; conjugation of a complex form over
    /// the real coordinate coframe.
    pub fn conj(&self) -> FormField {
        FormField {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn re(&self) -> FormField {
        FormField {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|a| a.re_part()).collect(),
        }
    }

    pub fn im(&self) -> FormField {
        FormField {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|a| a.im_part()).collect(),
        }
    }

    pub fn wedge(&self, rhs: &FormField) -> Result<FormField> {
        let (k, l) = (self.degree, rhs.degree);
        if k + l > 4 {
            return Err(Error::DegreeOverflow {
                left: k as u8,
                right: l as u8,
            });
        }
        let mut out = FormField::zero(k + l);
        for (si, s) in tuples(k).iter().enumerate() {
            if self.coeffs[si].is_const_zero() {
                continue;
            }
            for (ti, t) in tuples(l).iter().enumerate() {
                if rhs.coeffs[ti].is_const_zero() {
                    continue;
                }
                if let Some((u, sign)) = merge_sign(s, t) {
                    let ui = tuple_index(k + l, &u);
                    let term = self.coeffs[si]
                        .mul(&rhs.coeffs[ti])
                        .scale(C::new(sign, 0.0));
                    out.coeffs[ui] = out.coeffs[ui].add(&term);
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative; degree must be at most 3.
    pub fn ext_d(&self) -> Result<FormField> {
        let k = self.degree;
        if k >= 4 {
            return Err(Error::DegreeOverflow {
                left: k as u8,
                right: 1,
            });
        }
        let mut out = FormField::zero(k + 1);
        for (ti, t) in tuples(k + 1).iter().enumerate() {
            let mut acc = CField::zero();
            for (j, &axis) in t.iter().enumerate() {
                let rest: Vec<usize> = t
                    .iter()
                    .copied()
                    .filter(|&v| v != axis)
                    .collect();
                let c = self.coeffs[tuple_index(k, &rest)].diff(axis)?;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc = acc.add(&c.scale(C::new(sign, 0.0)));
            }
            out.coeffs[ti] = acc;
        }
        Ok(out)
    }

    pub fn eval(&self, p: [f64; 4]) -> Result<Vec<CJet>> {
        self.coeffs.iter().map(|c| c.eval(p)).collect()
    }

    pub fn eval_values(&self, p: [f64; 4]) -> Result<Vec<C>> {
        self.coeffs.iter().map(|c| c.eval_value(p)).collect()
    }

    /// Largest coefficient magnitude at `p`.
    pub fn max_at(&self, p: [f64; 4]) -> Result<f64> {
        let vals = self.eval_values(p)?;
        Ok(vals.iter().fold(0.0, |m, v| m.max(v.norm())))
    }

    /// Evaluate on `degree` complex vectors by the determinant pairing.
    pub fn apply_at(&self, p: [f64; 4], vectors: &[[C; 4]]) -> Result<C> {
        assert_eq!(vectors.len(), self.degree);
        let vals = self.eval_values(p)?;
        let mut acc = C::new(0.0, 0.0);
        for (si, s) in tuples(self.degree).iter().enumerate() {
            if vals[si].norm() == 0.0 {
                continue;
            }
            let det = small_det(self.degree, &|a: usize, b: usize| vectors[b][s[a]]);
            acc += vals[si] * det;
        }
        Ok(acc)
    }

    /// Antisymmetric matrix Ω(∂μ, ∂ν) of a 2-form at a point.
    pub fn two_form_matrix_at(&self, p: [f64; 4]) -> Result<Mat4<CJet>> {
        assert_eq!(self.degree, 2);
        let vals = self.eval(p)?;
        let mut m = Mat4::<CJet>::zeros();
        for (si, s) in tuples(2).iter().enumerate() {
            m.m[s[0]][s[1]] = vals[si];
            m.m[s[1]][s[0]] = -vals[si];
        }
        Ok(m)
    }

    /// Smallest remaining derivative order among the coefficients.
    pub fn min_order(&self) -> u8 {
        self.coeffs.iter().map(|c| c.order()).min().unwrap_or(0)
    }
}

// ---------------------------------------------------------------------
// Vector fields and Lie brackets
// ---------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct VectorFieldOnChart {
    pub comps: [CField; 4],
}

impl VectorFieldOnChart {
    pub fn from_comps(comps: [CField; 4]) -> Self {
        VectorFieldOnChart { comps }
    }

    pub fn constant(v: [C; 4]) -> Self {
        VectorFieldOnChart {
            comps: v.map(CField::constant),
        }
    }

    /// Coordinate field ∂ᵢ.
    pub fn coordinate(i: usize) -> Self {
        let mut v = [C::new(0.0, 0.0); 4];
        v[i] = C::new(1.0, 0.0);
        Self::constant(v)
    }

    pub fn eval(&self, p: [f64; 4]) -> Result<[CJet; 4]> {
        Ok([
            self.comps[0].eval(p)?,
            self.comps[1].eval(p)?,
            self.comps[2].eval(p)?,
            self.comps[3].eval(p)?,
        ])
    }

    pub fn eval_value(&self, p: [f64; 4]) -> Result<[C; 4]> {
        Ok([
            self.comps[0].eval_value(p)?,
            self.comps[1].eval_value(p)?,
            self.comps[2].eval_value(p)?,
            self.comps[3].eval_value(p)?,
        ])
    }

    pub fn add(&self, rhs: &Self) -> Self {
        VectorFieldOnChart {
            comps: std::array::from_fn(|i| self.comps[i].add(&rhs.comps[i])),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        VectorFieldOnChart {
            comps: std::array::from_fn(|i| self.comps[i].sub(&rhs.comps[i])),
        }
    }

    pub fn neg(&self) -> Self {
        VectorFieldOnChart {
            comps: std::array::from_fn(|i| self.comps[i].neg()),
        }
    }

    pub fn scale(&self, c: C) -> Self {
        VectorFieldOnChart {
            comps: std::array::from_fn(|i| self.comps[i].scale(c)),
        }
    }

    pub fn scale_field(&self, f: &CField) -> Self {
        VectorFieldOnChart {
            comps: std::array::from_fn(|i| f.mul(&self.comps[i])),
        }
    }
}

/// [X,Y]^k = Σᵢ Xⁱ ∂ᵢYᵏ − Yⁱ ∂ᵢXᵏ.
pub fn lie_bracket(
    x: &VectorFieldOnChart,
    y: &VectorFieldOnChart,
) -> Result<VectorFieldOnChart> {
    let mut comps: [CField; 4] = std::array::from_fn(|_| CField::zero());
    for k in 0..4 {
        let mut acc = CField::zero();
        for i in 0..4 {
            if !x.comps[i].is_const_zero() {
                acc = acc.add(&x.comps[i].mul(&y.comps[k].diff(i)?));
            }
            if !y.comps[i].is_const_zero() {
                acc = acc.sub(&y.comps[i].mul(&x.comps[k].diff(i)?));
            }
        }
        comps[k] = acc;
    }
    Ok(VectorFieldOnChart { comps })
}

// ---------------------------------------------------------------------
// Endomorphism and metric fields
// ---------------------------------------------------------------------

/// (1,1)-tensor field; `m[i][j]` is the i-th component of the image of
/// ∂ⱼ.
#[derive(Clone, Debug)]
pub struct EndomorphismField {
    pub m: [[CField; 4]; 4],
}

impl EndomorphismField {
    pub fn from_const(a: &Mat4<f64>) -> Self {
        EndomorphismField {
            m: std::array::from_fn(|i| {
                std::array::from_fn(|j| CField::constant_real(a.m[i][j]))
            }),
        }
    }

    pub fn from_fields(m: [[CField; 4]; 4]) -> Self {
        EndomorphismField { m }
    }

    pub fn apply(&self, v: &VectorFieldOnChart) -> VectorFieldOnChart {
        VectorFieldOnChart {
            comps: std::array::from_fn(|i| {
                let mut acc = CField::zero();
                for j in 0..4 {
                    if !self.m[i][j].is_const_zero() && !v.comps[j].is_const_zero() {
                        acc = acc.add(&self.m[i][j].mul(&v.comps[j]));
                    }
                }
                acc
            }),
        }
    }

    /// Field-level composition (self ∘ rhs).
    pub fn compose(&self, rhs: &Self) -> Self {
        EndomorphismField {
            m: std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let mut acc = CField::zero();
                    for k in 0..4 {
                        if !self.m[i][k].is_const_zero() && !rhs.m[k][j].is_const_zero() {
                            acc = acc.add(&self.m[i][k].mul(&rhs.m[k][j]));
                        }
                    }
                    acc
                })
            }),
        }
    }

    pub fn scale(&self, c: C) -> Self {
        EndomorphismField {
            m: std::array::from_fn(|i| std::array::from_fn(|j| self.m[i][j].scale(c))),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        EndomorphismField {
            m: std::array::from_fn(|i| {
                std::array::from_fn(|j| self.m[i][j].add(&rhs.m[i][j]))
            }),
        }
    }

    pub fn eval(&self, p: [f64; 4]) -> Result<Mat4<CJet>> {
        let mut out = Mat4::<CJet>::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.m[i][j] = self.m[i][j].eval(p)?;
            }
        }
        Ok(out)
    }

    pub fn eval_value(&self, p: [f64; 4]) -> Result<Mat4<C>> {
        let mut out = Mat4::<C>::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.m[i][j] = self.m[i][j].eval_value(p)?;
            }
        }
        Ok(out)
    }

    /// Max magnitude of the imaginary parts at `p`; valid almost
    /// product/complex structures on a real chart are real.
    pub fn imaginary_residual(&self, p: [f64; 4]) -> Result<f64> {
        let v = self.eval_value(p)?;
        let mut m = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                m = m.max(v.m[i][j].im.abs());
            }
        }
        Ok(m)
    }

    /// Real value matrix at `p`, requiring imaginary parts below an
    /// absolute tolerance.
    pub fn eval_real(&self, p: [f64; 4]) -> Result<Mat4<f64>> {
        let v = self.eval_value(p)?;
        let scale = v.max_magnitude().max(1.0);
        let mut out = Mat4::<f64>::zeros();
        for i in 0..4 {
            for j in 0..4 {
                if v.m[i][j].im.abs() > tol::FIRST_DERIVATIVE * scale {
                    return Err(Error::Incompatible {
                        message: format!(
                            "endomorphism entry ({i},{j}) has imaginary part {:.3e}",
                            v.m[i][j].im
                        ),
                    });
                }
                out.m[i][j] = v.m[i][j].re;
            }
        }
        Ok(out)
    }

    pub fn min_order(&self) -> u8 {
        self.m
            .iter()
            .flat_map(|row| row.iter().map(|f| f.order()))
            .min()
            .unwrap_or(0)
    }
}

/// Symmetric (0,2)-tensor field with complex-capable entries; real
/// extraction is checked.
#[derive(Clone, Debug)]
pub struct MetricField {
    pub m: [[CField; 4]; 4],
}

impl MetricField {
    pub fn from_const(a: &Mat4<f64>) -> Self {
        MetricField {
            m: std::array::from_fn(|i| {
                std::array::from_fn(|j| CField::constant_real(a.m[i][j]))
            }),
        }
    }

    pub fn from_fields(m: [[CField; 4]; 4]) -> Self {
        MetricField { m }
    }

    pub fn eval_jets(&self, p: [f64; 4]) -> Result<Mat4<CJet>> {
        let mut out = Mat4::<CJet>::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.m[i][j] = self.m[i][j].eval(p)?;
            }
        }
        Ok(out)
    }

    /// Real second-order jets of the metric entries; fails when any
    /// entry carries a non-negligible imaginary part.
    pub fn eval_real_jets(&self, p: [f64; 4]) -> Result<Mat4<Jet>> {
        let jets = self.eval_jets(p)?;
        let mut scale = 1.0f64;
        for i in 0..4 {
            for j in 0..4 {
                scale = scale.max(jets.m[i][j].v.norm());
            }
        }
        let mut out = Mat4::<Jet>::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let im = jets.m[i][j].im_jet();
                let imax = im.v.abs().max(
                    im.g.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                );
                if imax > tol::FIRST_DERIVATIVE * scale {
                    return Err(Error::Incompatible {
                        message: format!(
                            "metric entry ({i},{j}) has imaginary part {imax:.3e}"
                        ),
                    });
                }
                out.m[i][j] = jets.m[i][j].re_jet();
            }
        }
        Ok(out)
    }

    pub fn eval_value(&self, p: [f64; 4]) -> Result<Mat4<f64>> {
        let jets = self.eval_real_jets(p)?;
        let mut out = Mat4::<f64>::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.m[i][j] = jets.m[i][j].v;
            }
        }
        Ok(out)
    }

    pub fn min_order(&self) -> u8 {
        self.m
            .iter()
            .flat_map(|row| row.iter().map(|f| f.order()))
            .min()
            .unwrap_or(0)
    }
}

// ---------------------------------------------------------------------
// Hodge star
// ---------------------------------------------------------------------

/// Sign of the permutation (s, complement(s)) of {0,1,2,3}.
fn complement_sign(s: &[usize]) -> f64 {
    let c = complement(s);
    merge_sign(s, &c).expect("tuple and complement are disjoint").1
}

/// Star of the jet coefficients of a degree-`k` form against the
/// inverse metric Gram pairing: α ∧ ★β = ⟨α,β⟩ vol, with
/// vol = ω·dx⁰∧dx¹∧dx²∧dx³.
pub fn star_jets(
    k: usize,
    beta: &[CJet],
    ginv: &Mat4<CJet>,
    omega: CJet,
) -> Vec<CJet> {
    let out_dim = form_dim(4 - k);
    let mut out = vec![CJet::constant(C::new(0.0, 0.0)); out_dim];
    for s in tuples(k) {
        let mut inner = CJet::constant(C::new(0.0, 0.0));
        for (ti, t) in tuples(k).iter().enumerate() {
            let det = small_det(k, &|a: usize, b: usize| ginv.m[s[a]][t[b]]);
            inner = inner + beta[ti] * det;
        }
        let sc = complement(s);
        let sign = complement_sign(s);
        let idx = tuple_index(4 - k, &sc);
        out[idx] = out[idx] + omega * inner.map(|x| x * sign);
    }
    out
}

/// Pointwise star on 2-forms as a 6×6 matrix over the increasing-pair
/// basis; column `t` holds the coefficients of ★dx^t.
pub fn star2_matrix(ginv: &Mat4<f64>, omega: f64) -> [[f64; 6]; 6] {
    let mut m = [[0.0; 6]; 6];
    for (ti, t) in tuples(2).iter().enumerate() {
        for s in tuples(2) {
            let det = small_det(2, &|a: usize, b: usize| ginv.m[s[a]][t[b]]);
            let idx = tuple_index(2, &complement(s));
            m[idx][ti] += complement_sign(s) * omega * det;
        }
    }
    m
}

/// Field-level Hodge star. The output coefficients are closure-backed
/// jets assembled from the inputs, so the result can be differentiated
/// to the depth the inputs support (capped at 2).
pub fn hodge_star(
    alpha: &FormField,
    g: &MetricField,
    vol: &FormField,
) -> Result<FormField> {
    assert_eq!(vol.degree, 4);
    let k = alpha.degree;
    let order = alpha
        .min_order()
        .min(g.min_order())
        .min(vol.min_order())
        .min(2);
    let alpha = Arc::new(alpha.clone());
    let g = Arc::new(g.clone());
    let omega = vol.coeffs[0].clone();
    let coeffs = (0..form_dim(4 - k))
        .map(|idx| {
            let alpha = alpha.clone();
            let g = g.clone();
            let omega = omega.clone();
            CField::from_jet_fn(order, move |p| {
                let beta = alpha.eval(p)?;
                let gj = g.eval_jets(p)?;
                let ginv = gj.inverse().map_err(|_| Error::Degenerate {
                    what: "metric is singular at a star evaluation point".into(),
                })?;
                let om = omega.eval(p)?;
                Ok(star_jets(k, &beta, &ginv, om)[idx])
            })
        })
        .collect();
    Ok(FormField {
        degree: 4 - k,
        coeffs,
    })
}

// ---------------------------------------------------------------------
// Nijenhuis tensor
// ---------------------------------------------------------------------

/// N(X,Y) = [JX,JY] − J[JX,Y] − J[X,JY] + ε[X,Y], with ε = J² (−1 for
/// a complex-type structure, +1 for product-type). The bracket fields
/// are assembled once; evaluation is pointwise and checks J² = εId at
/// the point first.
pub struct NijenhuisOperator {
    j: EndomorphismField,
    eps: f64,
    n: VectorFieldOnChart,
}

impl NijenhuisOperator {
    pub fn new(
        j: &EndomorphismField,
        eps: f64,
        x: &VectorFieldOnChart,
        y: &VectorFieldOnChart,
    ) -> Result<Self> {
        let jx = j.apply(x);
        let jy = j.apply(y);
        let n = lie_bracket(&jx, &jy)?
            .sub(&j.apply(&lie_bracket(&jx, y)?))
            .sub(&j.apply(&lie_bracket(x, &jy)?))
            .add(&lie_bracket(x, y)?.scale(C::new(eps, 0.0)));
        Ok(NijenhuisOperator {
            j: j.clone(),
            eps,
            n,
        })
    }

    pub fn eval(&self, p: [f64; 4]) -> Result<[C; 4]> {
        let jv = self.j.eval_value(p)?;
        let sq = jv.mul(&jv);
        let id = Mat4::<C>::identity().scale(C::new(self.eps, 0.0));
        let residual = sq.sub(&id).max_magnitude();
        let scale = jv.max_magnitude().max(1.0);
        if residual > tol::ALGEBRAIC * scale * scale {
            return Err(Error::NotParaHyperhermitian {
                message: format!(
                    "endomorphism square differs from {}·Id by {residual:.3e}",
                    self.eps
                ),
            });
        }
        self.n.eval_value(p)
    }
}

/// One-shot Nijenhuis evaluation.
pub fn nijenhuis_at(
    j: &EndomorphismField,
    eps: f64,
    x: &VectorFieldOnChart,
    y: &VectorFieldOnChart,
    p: [f64; 4],
) -> Result<[C; 4]> {
    NijenhuisOperator::new(j, eps, x, y)?.eval(p)
}

// ---------------------------------------------------------------------
// Affine chart maps and pullbacks
// ---------------------------------------------------------------------

/// Chart self-map p ↦ M·p + b with constant linear part, as used by
/// deck transformations of the surface models.
#[derive(Clone, Debug)]
pub struct AffineMap4 {
    pub mat: Mat4<f64>,
    pub tr: [f64; 4],
}

/// Transport a jet at φ(p) back to p through the affine map: the
/// gradient picks up Mᵀ, the Hessian Mᵀ·H·M.
fn jet_affine_pullback(j: CJet, m: &Mat4<f64>) -> CJet {
    let g: [C; 4] = std::array::from_fn(|i| {
        let mut acc = C::new(0.0, 0.0);
        for a in 0..4 {
            acc += j.g[a] * m.m[a][i];
        }
        acc
    });
    let mut h = [C::new(0.0, 0.0); 10];
    for i in 0..4 {
        for jj in i..4 {
            let mut acc = C::new(0.0, 0.0);
            for a in 0..4 {
                for b in 0..4 {
                    acc += j.hess(a, b) * m.m[a][i] * m.m[b][jj];
                }
            }
            h[crate::jet::hidx(i, jj)] = acc;
        }
    }
    CJet { v: j.v, g, h }
}

impl AffineMap4 {
    pub fn new(mat: Mat4<f64>, tr: [f64; 4]) -> Self {
        AffineMap4 { mat, tr }
    }

    pub fn translation(tr: [f64; 4]) -> Self {
        AffineMap4 {
            mat: Mat4::identity(),
            tr,
        }
    }

    pub fn apply(&self, p: [f64; 4]) -> [f64; 4] {
        let mp = self.mat.matvec(p);
        std::array::from_fn(|i| mp[i] + self.tr[i])
    }

    /// Compose a scalar field with the map: (φ*f)(p) = f(φ(p)).
    pub fn pullback_scalar(&self, f: &CField) -> CField {
        let f = f.clone();
        let map = self.clone();
        CField::from_jet_fn(f.order().min(2), move |p| {
            Ok(jet_affine_pullback(f.eval(map.apply(p))?, &map.mat))
        })
    }

    /// (φ*α)_S(p) = Σ_T α_T(φ(p)) · det(M[T,S]).
    pub fn pullback_form(&self, alpha: &FormField) -> FormField {
        let k = alpha.degree;
        let order = alpha.min_order().min(2);
        let alpha = Arc::new(alpha.clone());
        let coeffs = (0..form_dim(k))
            .map(|si| {
                let alpha = alpha.clone();
                let map = self.clone();
                CField::from_jet_fn(order, move |p| {
                    let q = map.apply(p);
                    let vals = alpha.eval(q)?;
                    let s = tuples(k)[si];
                    let mut acc = CJet::constant(C::new(0.0, 0.0));
                    for (ti, t) in tuples(k).iter().enumerate() {
                        let det = small_det(k, &|a: usize, b: usize| {
                            C::new(map.mat.m[t[a]][s[b]], 0.0)
                        });
                        acc = acc + vals[ti].map(|x| x * det);
                    }
                    Ok(jet_affine_pullback(acc, &map.mat))
                })
            })
            .collect();
        FormField { degree: k, coeffs }
    }

    /// (φ*g)(p) = Mᵀ·g(φ(p))·M.
    pub fn pullback_metric(&self, g: &MetricField) -> MetricField {
        let g = Arc::new(g.clone());
        let m = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let g = g.clone();
                let map = self.clone();
                CField::from_jet_fn(g.min_order().min(2), move |p| {
                    let jets = g.eval_jets(map.apply(p))?;
                    let mut acc = CJet::constant(C::new(0.0, 0.0));
                    for a in 0..4 {
                        for b in 0..4 {
                            let f = map.mat.m[a][i] * map.mat.m[b][j];
                            if f != 0.0 {
                                acc = acc + jets.m[a][b].map(|x| x * f);
                            }
                        }
                    }
                    Ok(jet_affine_pullback(acc, &map.mat))
                })
            })
        });
        MetricField { m }
    }

    /// (φ*J)(p) = M⁻¹·J(φ(p))·M.
    pub fn pullback_endomorphism(&self, j: &EndomorphismField) -> Result<EndomorphismField> {
        let minv = self.mat.inverse()?;
        let j = Arc::new(j.clone());
        let order = j.min_order().min(2);
        let m = std::array::from_fn(|r| {
            std::array::from_fn(|c| {
                let j = j.clone();
                let map = self.clone();
                let minv = minv;
                CField::from_jet_fn(order, move |p| {
                    let jm = j.eval(map.apply(p))?;
                    let mut acc = CJet::constant(C::new(0.0, 0.0));
                    for a in 0..4 {
                        for b in 0..4 {
                            let f = minv.m[r][a] * map.mat.m[b][c];
                            if f != 0.0 {
                                acc = acc + jm.m[a][b].map(|x| x * f);
                            }
                        }
                    }
                    Ok(jet_affine_pullback(acc, &map.mat))
                })
            })
        });
        Ok(EndomorphismField { m })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{COMPLEX_VARS, WALKER_VARS};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const I: C = C::new(0.0, 1.0);

    fn re(c: f64) -> C {
        C::new(c, 0.0)
    }

    fn wfield(text: &str) -> CField {
        CField::parse_real(text, WALKER_VARS).unwrap()
    }

    fn flat_neutral() -> MetricField {
        MetricField::from_const(&Mat4::from_rows([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
        ]))
    }

    fn std_vol() -> FormField {
        let mut v = FormField::zero(4);
        v.coeffs[0] = CField::constant_real(1.0);
        v
    }

    #[test]
    fn merge_signs() {
        assert_eq!(merge_sign(&[0], &[1]), Some((vec![0, 1], 1.0)));
        assert_eq!(merge_sign(&[1], &[0]), Some((vec![0, 1], -1.0)));
        assert_eq!(merge_sign(&[0, 1], &[2, 3]), Some((vec![0, 1, 2, 3], 1.0)));
        assert_eq!(merge_sign(&[2, 3], &[0, 1]), Some((vec![0, 1, 2, 3], 1.0)));
        assert_eq!(merge_sign(&[0, 2], &[1, 3]), Some((vec![0, 1, 2, 3], -1.0)));
        assert_eq!(merge_sign(&[0, 1], &[1, 2]), None);
    }

    #[test]
    fn wedge_basics() {
        let dx = FormField::dx(0);
        let dy = FormField::dx(1);
        let dxdx = dx.wedge(&dx).unwrap();
        assert_eq!(dxdx.max_at([0.0; 4]).unwrap(), 0.0);
        let dxdy = dx.wedge(&dy).unwrap();
        let v = dxdy
            .apply_at(
                [0.0; 4],
                &[
                    [re(1.0), re(0.0), re(0.0), re(0.0)],
                    [re(0.0), re(1.0), re(0.0), re(0.0)],
                ],
            )
            .unwrap();
        assert_eq!(v, re(1.0));
        // Degree overflow is refused.
        let vol = std_vol();
        assert!(matches!(
            vol.wedge(&dx),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn wedge_is_graded_anticommutative() {
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..40 {
            let deg_a = rng.gen_range(0..3usize);
            let deg_b = rng.gen_range(0..(4 - deg_a).min(3) + 1);
            let mk = |rng: &mut StdRng, k: usize| {
                FormField::from_coeffs(
                    k,
                    (0..form_dim(k))
                        .map(|_| {
                            let a = rng.gen_range(-2.0..2.0);
                            let b = rng.gen_range(-2.0..2.0);
                            let c = rng.gen_range(-2.0..2.0);
                            CField::parse_real(
                                &format!("{a:.3} + {b:.3}*x*y - {c:.3}*z^2"),
                                WALKER_VARS,
                            )
                            .unwrap()
                        })
                        .collect(),
                )
            };
            let a = mk(&mut rng, deg_a);
            let b = mk(&mut rng, deg_b);
            let ab = a.wedge(&b).unwrap();
            let ba = b.wedge(&a).unwrap();
            let sign = if (deg_a * deg_b) % 2 == 0 { 1.0 } else { -1.0 };
            let p = [0.3, -0.7, 1.1, 0.4];
            let va = ab.eval_values(p).unwrap();
            let vb = ba.eval_values(p).unwrap();
            for (x, y) in va.iter().zip(&vb) {
                assert!((x - y * re(sign)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn repeated_complex_factor_vanishes() {
        // dz₁∧dz̄₂ and dz₁∧dz̄₁ share the dz₁ factor.
        let dz1 = FormField::dx(0).add(&FormField::dx(1).scale(I));
        let dz1bar = dz1.conj();
        let dz2bar = FormField::dx(2).sub(&FormField::dx(3).scale(I));
        let a = dz1.wedge(&dz2bar).unwrap();
        let b = dz1.wedge(&dz1bar).unwrap();
        let w = a.wedge(&b).unwrap();
        assert!(w.max_at([0.4, -0.2, 0.9, 0.5]).unwrap() < 1e-15);
    }

    #[test]
    fn exterior_derivative_basics() {
        // d(x·dy) = dx∧dy.
        let alpha = FormField::dx(1).scale_field(&wfield("x"));
        let d = alpha.ext_d().unwrap();
        let vals = d.eval_values([0.7, 0.2, -0.3, 0.9]).unwrap();
        for (ti, t) in tuples(2).iter().enumerate() {
            let want = if *t == [0, 1] { 1.0 } else { 0.0 };
            assert!((vals[ti] - re(want)).norm() < 1e-15);
        }
        // d² = 0 on a random 1-form and 2-form with transcendental
        // coefficients.
        let mut rng = StdRng::seed_from_u64(22);
        for degree in [1usize, 2] {
            let alpha = FormField::from_coeffs(
                degree,
                (0..form_dim(degree))
                    .map(|k| {
                        wfield(&format!(
                            "sin({:.2}*x + {k}) * exp(y/3) + z^2*t",
                            rng.gen_range(0.5..1.5)
                        ))
                    })
                    .collect(),
            );
            let dd = alpha.ext_d().unwrap().ext_d().unwrap();
            for _ in 0..20 {
                let p: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                assert!(dd.max_at(p).unwrap() < 1e-10);
            }
        }
        // d of a top form is refused.
        assert!(matches!(
            std_vol().ext_d(),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn upper_half_plane_coframe_derivative() {
        // θ = dz/Im z on the z = x1 + i·y1 chart; dθ = (−1/2i)·θ∧θ̄,
        // equivalently (1/y1²)·dx1∧dy1.
        let inv_y = CField::parse_real("1/y1", COMPLEX_VARS).unwrap();
        let theta = FormField::dx(0)
            .add(&FormField::dx(1).scale(I))
            .scale_field(&inv_y);
        let d = theta.ext_d().unwrap();
        let rhs = theta
            .wedge(&theta.conj())
            .unwrap()
            .scale(re(-1.0) / (re(2.0) * I));
        for p in [[1.0, 2.0, 0.0, 0.0], [0.3, 0.8, 1.0, -1.0]] {
            let dv = d.eval_values(p).unwrap();
            let rv = rhs.eval_values(p).unwrap();
            for (a, b) in dv.iter().zip(&rv) {
                assert!((a - b).norm() < 1e-12);
            }
            // Explicit coefficient: 1/y1² on dx1∧dy1.
            let want = 1.0 / (p[1] * p[1]);
            assert!((dv[tuple_index(2, &[0, 1])] - re(want)).norm() < 1e-12);
        }
    }

    #[test]
    fn lie_bracket_basics() {
        // [∂x, x·∂y] = ∂y.
        let px = VectorFieldOnChart::coordinate(0);
        let xpy = VectorFieldOnChart::coordinate(1).scale_field(&wfield("x"));
        let b = lie_bracket(&px, &xpy).unwrap();
        let v = b.eval_value([0.4, 0.1, 0.0, 0.0]).unwrap();
        assert_eq!(v, [re(0.0), re(1.0), re(0.0), re(0.0)]);
        // [X,X] = 0 for a nonlinear field.
        let x = VectorFieldOnChart::from_comps([
            wfield("x*y"),
            wfield("sin(z)"),
            wfield("t^2 - x"),
            wfield("1 + y"),
        ]);
        let xx = lie_bracket(&x, &x).unwrap();
        let v = xx.eval_value([0.3, -0.9, 0.5, 0.2]).unwrap();
        assert!(v.iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn jacobi_identity_at_samples() {
        let x = VectorFieldOnChart::from_comps([
            wfield("y"),
            wfield("x*z"),
            wfield("t"),
            wfield("x + y"),
        ]);
        let y = VectorFieldOnChart::from_comps([
            wfield("z^2"),
            wfield("1"),
            wfield("x*y"),
            wfield("t*z"),
        ]);
        let z = VectorFieldOnChart::from_comps([
            wfield("t - x"),
            wfield("y^2"),
            wfield("2"),
            wfield("x"),
        ]);
        let j1 = lie_bracket(&lie_bracket(&x, &y).unwrap(), &z).unwrap();
        let j2 = lie_bracket(&lie_bracket(&y, &z).unwrap(), &x).unwrap();
        let j3 = lie_bracket(&lie_bracket(&z, &x).unwrap(), &y).unwrap();
        let total = j1.add(&j2).add(&j3);
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..20 {
            let p: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let v = total.eval_value(p).unwrap();
            assert!(v.iter().all(|c| c.norm() < 1e-9));
        }
    }

    #[test]
    fn hodge_star_flat_neutral_table() {
        let g = flat_neutral();
        let vol = std_vol();
        let star = |t: &[usize]| {
            let mut alpha = FormField::zero(2);
            alpha.coeffs[tuple_index(2, t)] = CField::constant_real(1.0);
            hodge_star(&alpha, &g, &vol).unwrap()
        };
        let p = [0.0; 4];
        // ★dx∧dy = dz∧dt and the rest of the table.
        let expect: [(&[usize], &[usize], f64); 6] = [
            (&[0, 1], &[2, 3], 1.0),
            (&[2, 3], &[0, 1], 1.0),
            (&[0, 2], &[1, 3], 1.0),
            (&[1, 3], &[0, 2], 1.0),
            (&[0, 3], &[1, 2], -1.0),
            (&[1, 2], &[0, 3], -1.0),
        ];
        for (src, dst, sign) in expect {
            let s = star(src);
            let vals = s.eval_values(p).unwrap();
            for (ti, t) in tuples(2).iter().enumerate() {
                let want = if **t == *dst { sign } else { 0.0 };
                assert!(
                    (vals[ti] - re(want)).norm() < 1e-14,
                    "star of {src:?} at {t:?}"
                );
            }
        }
        // ★1 = vol and ★vol = 1.
        let one = FormField::scalar(CField::constant_real(1.0));
        let s1 = hodge_star(&one, &g, &vol).unwrap();
        assert!((s1.eval_values(p).unwrap()[0] - re(1.0)).norm() < 1e-14);
        let sv = hodge_star(&vol, &g, &vol).unwrap();
        assert!((sv.eval_values(p).unwrap()[0] - re(1.0)).norm() < 1e-14);
    }

    #[test]
    fn hodge_star_defining_relation_random_metric() {
        // α ∧ ★β = ⟨α,β⟩·vol for a curved neutral metric and the
        // volume normalized by √det g, which also makes ★★ = Id on Λ².
        let entries = [
            ["1", "0", "x/4", "0"],
            ["0", "1", "0", "y/5"],
            ["x/4", "0", "-1", "0"],
            ["0", "y/5", "0", "-1"],
        ];
        let g = MetricField::from_fields(std::array::from_fn(|i| {
            std::array::from_fn(|j| wfield(entries[i][j]))
        }));
        // det g = (1 + x²/16)(1 + y²/25) for this block shape; volume
        // coefficient √det g keeps ⟨vol,vol⟩ = 1.
        let omega = wfield("sqrt((1 + x^2/16)*(1 + y^2/25))");
        let mut vol = FormField::zero(4);
        vol.coeffs[0] = omega;
        let mut rng = StdRng::seed_from_u64(24);
        for _ in 0..10 {
            let p: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-0.9..0.9));
            let gv = g.eval_value(p).unwrap();
            let ginv = gv.inverse().unwrap();
            let om = vol.coeffs[0].eval_value(p).unwrap().re;
            let mk = |rng: &mut StdRng| -> Vec<C> {
                (0..6).map(|_| re(rng.gen_range(-2.0..2.0))).collect()
            };
            let av = mk(&mut rng);
            let bv = mk(&mut rng);
            // Direct Gram pairing of 2-forms.
            let mut inner = C::new(0.0, 0.0);
            for (si, s) in tuples(2).iter().enumerate() {
                for (ti, t) in tuples(2).iter().enumerate() {
                    let det = small_det(2, &|a: usize, b: usize| ginv.m[s[a]][t[b]]);
                    inner += av[si] * bv[ti] * det;
                }
            }
            // α∧★β as a multiple of dx⁰∧dx¹∧dx²∧dx³: the S-component
            // of α only meets the complement component of ★β.
            let star = star2_matrix(&ginv, om);
            let mut wedge_top = C::new(0.0, 0.0);
            for (si, s) in tuples(2).iter().enumerate() {
                let ui = tuple_index(2, &complement(s));
                let mut starred = C::new(0.0, 0.0);
                for ti in 0..6 {
                    starred += re(star[ui][ti]) * bv[ti];
                }
                wedge_top += av[si] * starred * re(complement_sign(s));
            }
            assert!(
                (wedge_top - inner * re(om)).norm() < 1e-10,
                "defining relation at {p:?}"
            );
            // ★★ = Id on Λ² at the √det g normalization.
            let mut ss = [[0.0; 6]; 6];
            for i in 0..6 {
                for j in 0..6 {
                    for k in 0..6 {
                        ss[i][j] += star[i][k] * star[k][j];
                    }
                }
            }
            for i in 0..6 {
                for j in 0..6 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ss[i][j] - want).abs() < 1e-10, "star² at ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn hodge_star_field_matches_pointwise_matrix() {
        let g = flat_neutral();
        let vol = std_vol();
        let alpha = FormField::from_coeffs(
            2,
            (0..6).map(|k| wfield(&format!("x + {k}*y"))).collect(),
        );
        let starred = hodge_star(&alpha, &g, &vol).unwrap();
        let p = [0.4, -0.3, 0.8, 0.1];
        let ginv = g.eval_value(p).unwrap().inverse().unwrap();
        let m = star2_matrix(&ginv, 1.0);
        let av = alpha.eval_values(p).unwrap();
        let sv = starred.eval_values(p).unwrap();
        for u in 0..6 {
            let mut want = C::new(0.0, 0.0);
            for t in 0..6 {
                want += re(m[u][t]) * av[t];
            }
            assert!((sv[u] - want).norm() < 1e-13);
        }
    }

    #[test]
    fn nijenhuis_vanishes_for_constant_structures() {
        // The canonical J₁ has constant coefficients, so all its
        // Nijenhuis values vanish even on position-dependent fields.
        let j1 = EndomorphismField::from_const(&Mat4::from_cols([
            [0.0, 1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0, 0.0],
        ]));
        let x = VectorFieldOnChart::from_comps([
            wfield("x*y"),
            wfield("z"),
            wfield("sin(t)"),
            wfield("1"),
        ]);
        let y = VectorFieldOnChart::from_comps([
            wfield("t"),
            wfield("x^2"),
            wfield("y"),
            wfield("z*x"),
        ]);
        let op = NijenhuisOperator::new(&j1, -1.0, &x, &y).unwrap();
        let mut rng = StdRng::seed_from_u64(25);
        for _ in 0..20 {
            let p: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let v = op.eval(p).unwrap();
            assert!(v.iter().all(|c| c.norm() < 1e-12));
        }
        // Tensoriality: N(fX, Y) = f·N(X,Y) pointwise, checked with a
        // structure that is not integrable so N ≠ 0.
        let jvar = EndomorphismField::from_fields([
            [wfield("0"), wfield("-1 - x^2"), wfield("0"), wfield("0")],
            [
                wfield("1/(1 + x^2)"),
                wfield("0"),
                wfield("0"),
                wfield("0"),
            ],
            [wfield("0"), wfield("0"), wfield("0"), wfield("-1 - y^2")],
            [
                wfield("0"),
                wfield("0"),
                wfield("1/(1 + y^2)"),
                wfield("0"),
            ],
        ]);
        let f = wfield("1 + z^2/2 + x*t");
        let fx = x.scale_field(&f);
        let n_xy = NijenhuisOperator::new(&jvar, -1.0, &x, &y).unwrap();
        let n_fxy = NijenhuisOperator::new(&jvar, -1.0, &fx, &y).unwrap();
        let n_yx = NijenhuisOperator::new(&jvar, -1.0, &y, &x).unwrap();
        let mut saw_nonzero = false;
        for _ in 0..10 {
            let p: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let a = n_xy.eval(p).unwrap();
            let b = n_fxy.eval(p).unwrap();
            let c = n_yx.eval(p).unwrap();
            let fv = f.eval_value(p).unwrap();
            for k in 0..4 {
                assert!((b[k] - fv * a[k]).norm() < 1e-9, "tensoriality");
                assert!((a[k] + c[k]).norm() < 1e-10, "antisymmetry");
                if a[k].norm() > 1e-3 {
                    saw_nonzero = true;
                }
            }
        }
        assert!(saw_nonzero, "variable J should have nonvanishing torsion");
        // Wrong ε is refused.
        let bad = NijenhuisOperator::new(&j1, 1.0, &x, &y).unwrap();
        assert!(matches!(
            bad.eval([0.0; 4]),
            Err(Error::NotParaHyperhermitian { .. })
        ));
    }

    #[test]
    fn affine_pullbacks() {
        let mut rng = StdRng::seed_from_u64(26);
        let mut mat = Mat4::identity();
        for i in 0..4 {
            for j in 0..4 {
                mat.m[i][j] += rng.gen_range(-0.3..0.3);
            }
        }
        let map = AffineMap4::new(mat, [0.2, -0.5, 0.7, 0.1]);
        // Scalar: (φ*f)(p) = f(φ(p)), including first derivatives.
        let f = wfield("sin(x) + y*z^2 - t");
        let pf = map.pullback_scalar(&f);
        let p = [0.3, 0.6, -0.2, 0.8];
        let q = map.apply(p);
        assert!((pf.eval_value(p).unwrap() - f.eval_value(q).unwrap()).norm() < 1e-13);
        let jet_p = pf.eval(p).unwrap();
        let jet_q = f.eval(q).unwrap();
        for i in 0..4 {
            let mut want = C::new(0.0, 0.0);
            for a in 0..4 {
                want += jet_q.g[a] * re(mat.m[a][i]);
            }
            assert!((jet_p.g[i] - want).norm() < 1e-12);
        }
        // Form: (φ*α)(v, w) at p equals α(Mv, Mw) at φ(p).
        let alpha = FormField::from_coeffs(
            2,
            (0..6).map(|k| wfield(&format!("x - {k}*t + y^2"))).collect(),
        );
        let pa = map.pullback_form(&alpha);
        let v = [re(0.3), re(-1.0), re(0.5), re(0.9)];
        let w = [re(1.1), re(0.2), re(-0.4), re(0.6)];
        let mv: [C; 4] = std::array::from_fn(|i| {
            (0..4).map(|j| re(mat.m[i][j]) * v[j]).sum()
        });
        let mw: [C; 4] = std::array::from_fn(|i| {
            (0..4).map(|j| re(mat.m[i][j]) * w[j]).sum()
        });
        let lhs = pa.apply_at(p, &[v, w]).unwrap();
        let rhs = alpha.apply_at(q, &[mv, mw]).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        // Pullback commutes with d (checked at a point).
        let d_pa = pa.ext_d().unwrap();
        let p_da = map.pullback_form(&alpha.ext_d().unwrap());
        let a = d_pa.eval_values(p).unwrap();
        let b = p_da.eval_values(p).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-11);
        }
        // Metric: (φ*g)(u,v) = g(Mu, Mv).
        let gfield = MetricField::from_fields(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                if i == j {
                    wfield(if i < 2 { "1 + x^2/9" } else { "-1 - y^2/9" })
                } else {
                    wfield("0")
                }
            })
        }));
        let pg = map.pullback_metric(&gfield);
        let gv = gfield.eval_value(q).unwrap();
        let pgv = pg.eval_value(p).unwrap();
        let want = mat.transpose().mul(&gv).mul(&mat);
        assert!(pgv.sub(&want).max_magnitude() < 1e-12);
        // Endomorphism: constant J pulls back to M⁻¹JM.
        let j = EndomorphismField::from_const(&Mat4::from_cols([
            [0.0, 1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0, 0.0],
        ]));
        let pj = map.pullback_endomorphism(&j).unwrap();
        let jv = j.eval_real(q).unwrap();
        let want = mat.inverse().unwrap().mul(&jv).mul(&mat);
        let got = pj.eval_real(p).unwrap();
        assert!(got.sub(&want).max_magnitude() < 1e-12);
    }
}
