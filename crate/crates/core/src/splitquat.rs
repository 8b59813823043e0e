//! Split quaternions and the pointwise linear algebra of
//! para-hypercomplex triples on R⁴.
//!
//! The split quaternion algebra is spanned by 1, j₁, j₂, j₃ with
//! j₁² = −1, j₂² = j₃² = +1 and j₁j₂ = −j₂j₁ = j₃. A para-hypercomplex
//! triple is a matrix representation of the imaginary units: three real
//! 4x4 endomorphisms with J₁² = −Id, J₂² = J₃² = +Id, J₁J₂ = −J₂J₁ = J₃.
//!
//! A compatible (para-hyperhermitian) metric satisfies
//! g(J₁X,J₁Y) = −g(J₂X,J₂Y) = −g(J₃X,J₃Y) = g(X,Y); such metrics are
//! neutral and correspond bijectively to skew 2-forms on the
//! +1-eigenplane of J₂, which this module constructs both ways.

use crate::error::{Error, Result};
use crate::linalg::Mat4;
use crate::scalar::Scalar;
use crate::tol;
use std::ops::{Add, Mul, Neg, Sub};

/// Element r + a₁j₁ + a₂j₂ + a₃j₃ of the split quaternions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitQuat<T> {
    pub r: T,
    pub j1: T,
    pub j2: T,
    pub j3: T,
}

pub type SplitQuat64 = SplitQuat<f64>;

impl<T: Scalar> SplitQuat<T> {
    pub fn new(r: T, j1: T, j2: T, j3: T) -> Self {
        SplitQuat { r, j1, j2, j3 }
    }

    pub fn from_real(r: T) -> Self {
        SplitQuat::new(r, T::zero(), T::zero(), T::zero())
    }

    pub fn zero() -> Self {
        Self::from_real(T::zero())
    }

    pub fn one() -> Self {
        Self::from_real(T::one())
    }

    pub fn unit_j1() -> Self {
        SplitQuat::new(T::zero(), T::one(), T::zero(), T::zero())
    }

    pub fn unit_j2() -> Self {
        SplitQuat::new(T::zero(), T::zero(), T::one(), T::zero())
    }

    pub fn unit_j3() -> Self {
        SplitQuat::new(T::zero(), T::zero(), T::zero(), T::one())
    }

    /// Conjugate: imaginary parts negated.
    pub fn conj(self) -> Self {
        SplitQuat::new(self.r, -self.j1, -self.j2, -self.j3)
    }

    /// The multiplicative norm form q·q̄ = r² + a₁² − a₂² − a₃², of
    /// signature (2,2); isotropic elements are not invertible.
    pub fn norm_form(self) -> T {
        self.r * self.r + self.j1 * self.j1 - self.j2 * self.j2 - self.j3 * self.j3
    }

    pub fn inverse(self) -> Result<Self> {
        let n = self.norm_form();
        if n.magnitude() == 0.0 {
            return Err(Error::Isotropic {
                what: "split quaternion with vanishing norm form".into(),
            });
        }
        let c = self.conj();
        Ok(SplitQuat::new(c.r / n, c.j1 / n, c.j2 / n, c.j3 / n))
    }

    pub fn magnitude(self) -> f64 {
        self.r
            .magnitude()
            .max(self.j1.magnitude())
            .max(self.j2.magnitude())
            .max(self.j3.magnitude())
    }
}

impl<T: Scalar> Add for SplitQuat<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        SplitQuat::new(
            self.r + rhs.r,
            self.j1 + rhs.j1,
            self.j2 + rhs.j2,
            self.j3 + rhs.j3,
        )
    }
}

impl<T: Scalar> Sub for SplitQuat<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        SplitQuat::new(
            self.r - rhs.r,
            self.j1 - rhs.j1,
            self.j2 - rhs.j2,
            self.j3 - rhs.j3,
        )
    }
}

impl<T: Scalar> Neg for SplitQuat<T> {
    type Output = Self;
    fn neg(self) -> Self {
        SplitQuat::new(-self.r, -self.j1, -self.j2, -self.j3)
    }
}

impl<T: Scalar> Mul for SplitQuat<T> {
    type Output = Self;
    /// Product expanded from the basis relations j₁² = −1,
    /// j₂² = j₃² = 1, j₁j₂ = j₃, j₂j₃ = −j₁, j₃j₁ = j₂.
    fn mul(self, q: Self) -> Self {
        let p = self;
        SplitQuat::new(
            p.r * q.r - p.j1 * q.j1 + p.j2 * q.j2 + p.j3 * q.j3,
            p.r * q.j1 + p.j1 * q.r - p.j2 * q.j3 + p.j3 * q.j2,
            p.r * q.j2 + p.j2 * q.r - p.j1 * q.j3 + p.j3 * q.j1,
            p.r * q.j3 + p.j3 * q.r + p.j1 * q.j2 - p.j2 * q.j1,
        )
    }
}

// ---------------------------------------------------------------------
// Para-hypercomplex triples
// ---------------------------------------------------------------------

type Mat4f = Mat4<f64>;

/// Matrix representation (J₁, J₂, J₃) of the imaginary split
/// quaternion units acting on R⁴.
#[derive(Clone, Debug, PartialEq)]
pub struct ParaHypercomplexTriple {
    pub j1: Mat4f,
    pub j2: Mat4f,
    pub j3: Mat4f,
}

/// The standard-basis triple: J₁e₁=e₂, J₁e₃=e₄, J₂e₁=e₃, J₂e₂=−e₄,
/// J₃ = J₁J₂.
pub fn canonical_triple() -> ParaHypercomplexTriple {
    let j1 = Mat4f::from_cols([
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]);
    let j2 = Mat4f::from_cols([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ]);
    let j3 = j1.mul(&j2);
    ParaHypercomplexTriple { j1, j2, j3 }
}

/// Entrywise residuals of the five defining relations.
#[derive(Clone, Copy, Debug)]
pub struct TripleResiduals {
    /// |J₁² + Id|, |J₂² − Id|, |J₃² − Id|.
    pub squares: [f64; 3],
    /// |J₁J₂ + J₂J₁|.
    pub anticommutation: f64,
    /// |J₁J₂ − J₃|.
    pub product: f64,
}

impl TripleResiduals {
    pub fn max(&self) -> f64 {
        self.squares
            .iter()
            .copied()
            .fold(self.anticommutation.max(self.product), f64::max)
    }
}

pub fn verify_triple(t: &ParaHypercomplexTriple) -> TripleResiduals {
    let id = Mat4f::identity();
    let sq1 = t.j1.mul(&t.j1).add(&id).max_magnitude();
    let sq2 = t.j2.mul(&t.j2).sub(&id).max_magnitude();
    let sq3 = t.j3.mul(&t.j3).sub(&id).max_magnitude();
    let j12 = t.j1.mul(&t.j2);
    let anti = j12.add(&t.j2.mul(&t.j1)).max_magnitude();
    let prod = j12.sub(&t.j3).max_magnitude();
    TripleResiduals {
        squares: [sq1, sq2, sq3],
        anticommutation: anti,
        product: prod,
    }
}

impl ParaHypercomplexTriple {
    /// Conjugated triple P·Jᵢ·P⁻¹; the defining relations are preserved.
    pub fn conjugated(&self, p: &Mat4f) -> Result<Self> {
        let pinv = p.inverse().map_err(|_| Error::Singular {
            what: "triple conjugation matrix".into(),
        })?;
        Ok(ParaHypercomplexTriple {
            j1: p.mul(&self.j1).mul(&pinv),
            j2: p.mul(&self.j2).mul(&pinv),
            j3: p.mul(&self.j3).mul(&pinv),
        })
    }
}

// ---------------------------------------------------------------------
// Eigenplanes of J₂ and the plus-form correspondence
// ---------------------------------------------------------------------

/// Reduced row echelon basis of the span of `rows`, with pivot
/// threshold relative to the largest row entry. Rows are returned in
/// pivot-column order with unit pivots, so the basis is canonical for
/// the subspace.
fn rref_basis(rows: [[f64; 4]; 4], rel_tol: f64) -> Vec<[f64; 4]> {
    let mut a = rows;
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let tol = rel_tol * scale;
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..4 {
        if row >= 4 {
            break;
        }
        let (best, best_abs) = (row..4)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if best_abs <= tol {
            continue;
        }
        a.swap(row, best);
        let inv = 1.0 / a[row][col];
        for c in 0..4 {
            a[row][c] *= inv;
        }
        a[row][col] = 1.0;
        for r in 0..4 {
            if r != row {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..4 {
                        a[r][c] -= f * a[row][c];
                    }
                    a[r][col] = 0.0;
                }
            }
        }
        pivots.push((col, row));
        row += 1;
    }
    pivots.iter().map(|&(_, r)| a[r]).collect()
}

/// Basis of the ±1-eigenplane of J₂, computed from the projector
/// (Id ± J₂)/2. Both eigenplanes of a valid triple are 2-dimensional.
pub fn eigenbasis(t: &ParaHypercomplexTriple, sign: f64) -> Result<[[f64; 4]; 2]> {
    let id = Mat4f::identity();
    let sq = t.j2.mul(&t.j2).sub(&id).max_magnitude();
    let scale = t.j2.max_magnitude().max(1.0);
    if sq > tol::ALGEBRAIC * scale * scale {
        return Err(Error::Incompatible {
            message: format!("J2 squared differs from identity by {sq:.3e}"),
        });
    }
    let proj = if sign >= 0.0 {
        id.add(&t.j2).scale(0.5)
    } else {
        id.sub(&t.j2).scale(0.5)
    };
    // Column space of the projector, as RREF rows of its transpose.
    let rows: [[f64; 4]; 4] = std::array::from_fn(|c| proj.col(c));
    let basis = rref_basis(rows, tol::RANK_PIVOT);
    if basis.len() != 2 {
        return Err(Error::Degenerate {
            what: format!(
                "J2 eigenprojector has rank {} instead of 2",
                basis.len()
            ),
        });
    }
    Ok([basis[0], basis[1]])
}

/// Skew 2-form on the +1-eigenplane of J₂, stored as its value on the
/// canonical ordered basis (u₁, u₂) and extended by zero on the
/// −1-eigenplane.
#[derive(Clone, Debug)]
pub struct PlusForm {
    pub c: f64,
    pub basis: [[f64; 4]; 2],
    /// Pivot coordinates: entry k of the projection onto the eigenplane
    /// reads off the coefficient of basis vector k.
    pivots: [usize; 2],
    /// Projector onto the eigenplane along its complement.
    proj: Mat4f,
}

impl PlusForm {
    pub fn new(t: &ParaHypercomplexTriple, c: f64) -> Result<Self> {
        let basis = eigenbasis(t, 1.0)?;
        let pivots = pivot_columns(&basis)?;
        let proj = Mat4f::identity().add(&t.j2).scale(0.5);
        Ok(PlusForm {
            c,
            basis,
            pivots,
            proj,
        })
    }

    /// Coefficients of the eigenplane projection of `x` in the stored
    /// basis; exact because the basis rows are in echelon form.
    fn plus_coords(&self, x: [f64; 4]) -> (f64, f64) {
        let p = self.proj.matvec(x);
        (p[self.pivots[0]], p[self.pivots[1]])
    }

    /// h(x, y) with the zero extension off the eigenplane.
    pub fn eval(&self, x: [f64; 4], y: [f64; 4]) -> f64 {
        let (ax, bx) = self.plus_coords(x);
        let (ay, by) = self.plus_coords(y);
        self.c * (ax * by - bx * ay)
    }
}

fn pivot_columns(basis: &[[f64; 4]; 2]) -> Result<[usize; 2]> {
    let mut pivots = [usize::MAX; 2];
    for (k, row) in basis.iter().enumerate() {
        pivots[k] = row
            .iter()
            .position(|v| *v != 0.0)
            .ok_or_else(|| Error::Degenerate {
                what: "zero eigenplane basis vector".into(),
            })?;
    }
    Ok(pivots)
}

/// Compatible neutral metric generated by a plus-form:
/// g(X,Y) = 2·(h(X,J₁Y) + h(Y,J₁X)). The normalization makes the
/// correspondence involutive: h(A,B) = ½·g(J₁A,B) on the eigenplane.
pub fn metric_from_plus_form(t: &ParaHypercomplexTriple, h: &PlusForm) -> Result<Mat4f> {
    if h.c == 0.0 {
        return Err(Error::Degenerate {
            what: "plus-form coefficient is zero".into(),
        });
    }
    let mut g = Mat4f::zeros();
    let e = Mat4f::identity();
    for mu in 0..4 {
        for nu in 0..4 {
            let emu = e.col(mu);
            let enu = e.col(nu);
            let j1emu = t.j1.matvec(emu);
            let j1enu = t.j1.matvec(enu);
            g.m[mu][nu] = 2.0 * (h.eval(emu, j1enu) + h.eval(enu, j1emu));
        }
    }
    Ok(g)
}

/// Recover the plus-form of a compatible metric: h(A,B) = ½·g(J₁A,B)
/// on the canonical eigenplane basis.
pub fn plus_form_from_metric(t: &ParaHypercomplexTriple, g: &Mat4f) -> Result<PlusForm> {
    let mut h = PlusForm::new(t, 0.0)?;
    let u1 = h.basis[0];
    let u2 = h.basis[1];
    h.c = 0.5 * g.pair(t.j1.matvec(u1), u2);
    if h.c == 0.0 {
        return Err(Error::Degenerate {
            what: "metric restricts to a degenerate plus-form".into(),
        });
    }
    Ok(h)
}

// ---------------------------------------------------------------------
// Compatibility, averaging, conformal factors
// ---------------------------------------------------------------------

/// Max entrywise residual of the three compatibility relations
/// g(J₁X,J₁Y) = g(X,Y), g(J₂X,J₂Y) = −g(X,Y), g(J₃X,J₃Y) = −g(X,Y),
/// on inputs normalized by the largest metric entry.
pub fn compatibility_residual(g: &Mat4f, t: &ParaHypercomplexTriple) -> f64 {
    let scale = g.max_magnitude();
    if scale == 0.0 {
        return 0.0;
    }
    let pull = |j: &Mat4f| j.transpose().mul(g).mul(j);
    let r1 = pull(&t.j1).sub(g).max_magnitude();
    let r2 = pull(&t.j2).add(g).max_magnitude();
    let r3 = pull(&t.j3).add(g).max_magnitude();
    r1.max(r2).max(r3) / scale
}

/// Averaged form and its rank.
#[derive(Clone, Debug)]
pub struct AveragedForm {
    pub form: Mat4f,
    pub rank: usize,
}

/// h(X,Y) = g(X,Y) + g(J₁X,J₁Y) − g(J₂X,J₂Y) − g(J₃X,J₃Y). Compatible
/// with the triple wherever non-degenerate; equals 4g when g itself is
/// compatible, and can vanish identically (its rank is reported, not
/// policed).
pub fn averaged_form(g: &Mat4f, t: &ParaHypercomplexTriple) -> AveragedForm {
    let pull = |j: &Mat4f| j.transpose().mul(g).mul(j);
    let form = g
        .add(&pull(&t.j1))
        .sub(&pull(&t.j2))
        .sub(&pull(&t.j3));
    let rank = form.rank(tol::RANK_PIVOT);
    AveragedForm { form, rank }
}

/// Conformal factor λ with g = λh, from a probe vector w that is
/// h-non-isotropic. Both metrics must be compatible with the triple;
/// the entrywise relation g = λh is then checked before returning.
pub fn conformal_factor(
    g: &Mat4f,
    h: &Mat4f,
    t: &ParaHypercomplexTriple,
    w: [f64; 4],
) -> Result<f64> {
    for (name, m) in [("first metric", g), ("second metric", h)] {
        let r = compatibility_residual(m, t);
        if r > tol::ALGEBRAIC {
            return Err(Error::Incompatible {
                message: format!("{name} fails compatibility by {r:.3e}"),
            });
        }
    }
    let hww = h.pair(w, w);
    let wmag = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if hww.abs() <= tol::RANK_PIVOT * h.max_magnitude() * wmag * wmag {
        return Err(Error::Isotropic {
            what: "conformal probe has vanishing h-norm".into(),
        });
    }
    let lambda = g.pair(w, w) / hww;
    let scale = g.max_magnitude().max(lambda.abs() * h.max_magnitude());
    let residual = g.sub(&h.scale(lambda)).max_magnitude();
    if scale > 0.0 && residual > tol::FIRST_DERIVATIVE * scale {
        return Err(Error::Incompatible {
            message: format!("metrics are not conformally related: residual {residual:.3e}"),
        });
    }
    Ok(lambda)
}

// ---------------------------------------------------------------------
// Quaternionic frames
// ---------------------------------------------------------------------

/// Frame (w, J₁w, J₂w, J₃w) of a non-isotropic vector, with the
/// transition determinant to a g-orthonormal basis. The determinant
/// equals g(w,w)².
#[derive(Clone, Debug)]
pub struct QuaternionicFrame {
    /// Columns w, J₁w, J₂w, J₃w.
    pub vectors: Mat4f,
    pub determinant: f64,
}

fn frame_of(t: &ParaHypercomplexTriple, w: [f64; 4]) -> Mat4f {
    Mat4f::from_cols([w, t.j1.matvec(w), t.j2.matvec(w), t.j3.matvec(w)])
}

/// Deterministic non-isotropic seed: the candidate with the largest
/// |g(v,v)| among the standard basis vectors and their pair sums. A
/// non-degenerate metric always exposes one.
fn nonisotropic_seed(g: &Mat4f) -> Result<[f64; 4]> {
    let mut best: Option<([f64; 4], f64)> = None;
    let mut consider = |v: [f64; 4]| {
        let n = g.pair(v, v).abs();
        if best.map_or(true, |(_, b)| n > b) {
            best = Some((v, n));
        }
    };
    let e = Mat4f::identity();
    for i in 0..4 {
        consider(e.col(i));
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            let mut v = e.col(i);
            v[j] = 1.0;
            consider(v);
        }
    }
    let (v, n) = best.unwrap();
    if n <= tol::RANK_PIVOT * g.max_magnitude() {
        return Err(Error::Degenerate {
            what: "no non-isotropic seed vector found".into(),
        });
    }
    Ok(v)
}

pub fn quaternionic_frame(
    g: &Mat4f,
    t: &ParaHypercomplexTriple,
    w: [f64; 4],
) -> Result<QuaternionicFrame> {
    let compat = compatibility_residual(g, t);
    if compat > tol::ALGEBRAIC {
        return Err(Error::Incompatible {
            message: format!("metric fails compatibility by {compat:.3e}"),
        });
    }
    let n = g.pair(w, w);
    let wmag = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if n.abs() <= tol::RANK_PIVOT * g.max_magnitude().max(1.0) * wmag * wmag {
        return Err(Error::Isotropic {
            what: "frame vector has vanishing g-norm".into(),
        });
    }
    // Reference orthonormal basis: the normalized quaternionic frame of
    // a deterministic seed. Its own transition determinant is g(v,v)²
    // by the same formula, which makes the result orientation-free.
    let seed = nonisotropic_seed(g)?;
    let nv = g.pair(seed, seed);
    let b = frame_of(t, seed).scale(1.0 / nv.abs().sqrt());
    let frame = frame_of(t, w);
    let transition = b.solve_mat(&frame)?;
    Ok(QuaternionicFrame {
        vectors: frame,
        determinant: transition.det(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    // Faithful 2x2 real matrix model: 1 ↦ Id, j₁ ↦ rotation,
    // j₂, j₃ ↦ reflections. Used as an independent product oracle.
    fn to_mat(q: SplitQuat64) -> [[f64; 2]; 2] {
        [
            [q.r - q.j3, -q.j1 + q.j2],
            [q.j1 + q.j2, q.r + q.j3],
        ]
    }

    fn from_mat(m: [[f64; 2]; 2]) -> SplitQuat64 {
        SplitQuat::new(
            (m[0][0] + m[1][1]) / 2.0,
            (m[1][0] - m[0][1]) / 2.0,
            (m[0][1] + m[1][0]) / 2.0,
            (m[1][1] - m[0][0]) / 2.0,
        )
    }

    fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let mut c = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    fn rand_quat(rng: &mut StdRng) -> SplitQuat64 {
        SplitQuat::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        )
    }

    #[test]
    fn unit_relations() {
        let one = SplitQuat64::one();
        let j1 = SplitQuat64::unit_j1();
        let j2 = SplitQuat64::unit_j2();
        let j3 = SplitQuat64::unit_j3();
        assert_eq!(j1 * j1, -one);
        assert_eq!(j2 * j2, one);
        assert_eq!(j3 * j3, one);
        assert_eq!(j1 * j2, j3);
        assert_eq!(j2 * j1, -j3);
        assert_eq!(j2 * j3, -j1);
        assert_eq!(j3 * j1, j2);
        // (1 + j₁)(1 − j₁) = 1 − j₁² = 2.
        assert_eq!((one + j1) * (one - j1), SplitQuat::from_real(2.0));
    }

    #[test]
    fn product_matches_matrix_model() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let p = rand_quat(&mut rng);
            let q = rand_quat(&mut rng);
            assert_eq!(from_mat(to_mat(p)), p);
            let direct = p * q;
            let via_model = from_mat(mat_mul(to_mat(p), to_mat(q)));
            assert!((direct - via_model).magnitude() < 1e-13);
        }
    }

    #[test]
    fn product_is_associative() {
        let mut rng = StdRng::seed_from_u64(12);
        for _ in 0..200 {
            let p = rand_quat(&mut rng);
            let q = rand_quat(&mut rng);
            let r = rand_quat(&mut rng);
            assert!((((p * q) * r) - (p * (q * r))).magnitude() < tol::EXACT);
        }
    }

    #[test]
    fn inverse_and_norm_form() {
        let q = SplitQuat::new(1.0, 2.0, 0.5, -0.25);
        let n = q.norm_form();
        assert_eq!(n, 1.0 + 4.0 - 0.25 - 0.0625);
        let qi = q.inverse().unwrap();
        assert!((q * qi - SplitQuat::one()).magnitude() < 1e-15);
        // Isotropic element: 1 + j₂ has norm form 0.
        let iso = SplitQuat::new(1.0, 0.0, 1.0, 0.0);
        assert!(matches!(iso.inverse(), Err(Error::Isotropic { .. })));
    }

    #[test]
    fn canonical_triple_is_exact() {
        let t = canonical_triple();
        assert_eq!(verify_triple(&t).max(), 0.0);
        // Stated actions on basis vectors.
        let e = Mat4f::identity();
        assert_eq!(t.j1.matvec(e.col(0)), e.col(1));
        assert_eq!(t.j2.matvec(e.col(0)), e.col(2));
        assert_eq!(t.j2.matvec(e.col(1)), [0.0, 0.0, 0.0, -1.0]);
        assert_eq!(t.j2.matvec(e.col(2)), e.col(0));
        assert_eq!(t.j3.matvec(e.col(0)), e.col(3));
        assert_eq!(t.j3.matvec(e.col(1)), e.col(2));
        assert_eq!(t.j3.matvec(e.col(2)), e.col(1));
        assert_eq!(t.j3.matvec(e.col(3)), e.col(0));
    }

    #[test]
    fn sign_flip_breaks_product_relation() {
        let mut t = canonical_triple();
        t.j2 = t.j2.scale(-1.0);
        let res = verify_triple(&t);
        assert!(res.squares.iter().all(|&s| s == 0.0));
        // J₁(−J₂) − J₃ = −2J₃ entrywise.
        assert_eq!(res.product, 2.0);
    }

    #[test]
    fn conjugated_triples_stay_valid() {
        let mut rng = StdRng::seed_from_u64(13);
        let t = canonical_triple();
        for _ in 0..20 {
            let mut p = Mat4f::identity();
            for i in 0..4 {
                for j in 0..4 {
                    p.m[i][j] += rng.gen_range(-0.3..0.3);
                }
            }
            let tc = t.conjugated(&p).unwrap();
            assert!(verify_triple(&tc).max() < 1e-10);
        }
    }

    #[test]
    fn canonical_eigenplanes() {
        let t = canonical_triple();
        let plus = eigenbasis(&t, 1.0).unwrap();
        assert_eq!(plus[0], [1.0, 0.0, 1.0, 0.0]);
        assert_eq!(plus[1], [0.0, 1.0, 0.0, -1.0]);
        let minus = eigenbasis(&t, -1.0).unwrap();
        assert_eq!(minus[0], [1.0, 0.0, -1.0, 0.0]);
        assert_eq!(minus[1], [0.0, 1.0, 0.0, 1.0]);
        // J₁ swaps the eigenplanes: J₁(e₁+e₃) = e₂+e₄ lies in V⁻.
        let img = t.j1.matvec(plus[0]);
        assert_eq!(img, [0.0, 1.0, 0.0, 1.0]);
        let proj_plus = Mat4f::identity().add(&t.j2).scale(0.5);
        assert_eq!(proj_plus.matvec(img), [0.0; 4]);
    }

    #[test]
    fn metric_from_canonical_plus_form() {
        let t = canonical_triple();
        let h = PlusForm::new(&t, 1.0).unwrap();
        assert_eq!(h.eval([1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, -1.0]), 1.0);
        let g = metric_from_plus_form(&t, &h).unwrap();
        let expected = Mat4f::from_rows([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
        ]);
        assert!(g.sub(&expected).max_magnitude() < 1e-15);
        assert_eq!(compatibility_residual(&g, &t), 0.0);
        assert_eq!(g.signature(1e-10), (2, 2, 0));
        // Eigenplanes are g-isotropic.
        for v in [
            [1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, -1.0],
            [1.0, 0.0, -1.0, 0.0],
            [0.0, 1.0, 0.0, 1.0],
        ] {
            assert_eq!(g.pair(v, v), 0.0);
        }
        // Degenerate coefficient is rejected.
        let h0 = PlusForm::new(&t, 0.0).unwrap();
        assert!(matches!(
            metric_from_plus_form(&t, &h0),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn plus_form_roundtrip() {
        let mut rng = StdRng::seed_from_u64(14);
        let base = canonical_triple();
        for k in 0..25 {
            let t = if k == 0 {
                base.clone()
            } else {
                let mut p = Mat4f::identity();
                for i in 0..4 {
                    for j in 0..4 {
                        p.m[i][j] += rng.gen_range(-0.3..0.3);
                    }
                }
                base.conjugated(&p).unwrap()
            };
            let c = rng.gen_range(0.25..4.0) * if k % 2 == 0 { 1.0 } else { -1.0 };
            let h = PlusForm::new(&t, c).unwrap();
            let g = metric_from_plus_form(&t, &h).unwrap();
            let back = plus_form_from_metric(&t, &g).unwrap();
            assert!((back.c - c).abs() < 1e-10 * c.abs().max(1.0));
            // h(A,B) = ½ g(J₁A, B) on arbitrary eigenplane pairs.
            let u1 = h.basis[0];
            let u2 = h.basis[1];
            for (a, b) in [(u1, u2), (u2, u1), (u1, u1)] {
                let lhs = h.eval(a, b);
                let rhs = 0.5 * g.pair(t.j1.matvec(a), b);
                assert!((lhs - rhs).abs() < 1e-10 * c.abs().max(1.0));
            }
            assert!(compatibility_residual(&g, &t) < 1e-12);
            assert_eq!(g.signature(1e-8), (2, 2, 0));
        }
    }

    #[test]
    fn averaged_form_degenerates_for_isometric_metrics() {
        let t = canonical_triple();
        let euclid = Mat4f::identity();
        let avg = averaged_form(&euclid, &t);
        assert_eq!(avg.form.max_magnitude(), 0.0);
        assert_eq!(avg.rank, 0);

        let alt = Mat4f::from_rows([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
        ]);
        let avg = averaged_form(&alt, &t);
        assert_eq!(avg.form.max_magnitude(), 0.0);
        assert_eq!(avg.rank, 0);

        // A compatible metric averages to four times itself.
        let h = PlusForm::new(&t, 1.5).unwrap();
        let g = metric_from_plus_form(&t, &h).unwrap();
        let avg = averaged_form(&g, &t);
        assert!(avg.form.sub(&g.scale(4.0)).max_magnitude() < 1e-14);
        assert_eq!(avg.rank, 4);
    }

    #[test]
    fn conformal_factors() {
        let t = canonical_triple();
        let h1 = PlusForm::new(&t, 1.25).unwrap();
        let h2 = PlusForm::new(&t, -0.5).unwrap();
        let g1 = metric_from_plus_form(&t, &h1).unwrap();
        let g2 = metric_from_plus_form(&t, &h2).unwrap();
        let w = [1.0, 0.0, 0.0, 0.0];
        // Compatible metrics at a point are proportional: λ = c₂/c₁.
        let lambda = conformal_factor(&g2, &g1, &t, w).unwrap();
        assert!((lambda - (-0.5 / 1.25)).abs() < 1e-12);
        assert_eq!(conformal_factor(&g1, &g1, &t, w).unwrap(), 1.0);
        let double = g1.scale(2.0);
        assert_eq!(conformal_factor(&double, &g1, &t, w).unwrap(), 2.0);
        // Isotropic probe: e₁+e₃ spans part of the null eigenplane.
        assert!(matches!(
            conformal_factor(&g2, &g1, &t, [1.0, 0.0, 1.0, 0.0]),
            Err(Error::Isotropic { .. })
        ));
        // Incompatible metric is refused.
        assert!(matches!(
            conformal_factor(&Mat4f::identity(), &g1, &t, w),
            Err(Error::Incompatible { .. })
        ));
    }

    #[test]
    fn quaternionic_frame_determinant() {
        let t = canonical_triple();
        let h = PlusForm::new(&t, 1.0).unwrap();
        let g = metric_from_plus_form(&t, &h).unwrap();
        // Unit-norm w = e₁: determinant 1.
        let f = quaternionic_frame(&g, &t, [1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((f.determinant - 1.0).abs() < 1e-12);
        // w = e₃ has g(w,w) = −1, so the determinant is (−1)² = 1.
        let f = quaternionic_frame(&g, &t, [0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!((f.determinant - 1.0).abs() < 1e-12);
        // General w: determinant g(w,w)².
        let w = [0.3, -1.2, 0.4, 0.9];
        let n = g.pair(w, w);
        let f = quaternionic_frame(&g, &t, w).unwrap();
        assert!((f.determinant - n * n).abs() < 1e-10);
        // Frame is g-orthogonal with norms (n, n, −n, −n).
        let gram = f.vectors.transpose().mul(&g).mul(&f.vectors);
        for i in 0..4 {
            for j in 0..4 {
                let want = match (i, j) {
                    (0, 0) | (1, 1) => n,
                    (2, 2) | (3, 3) => -n,
                    _ => 0.0,
                };
                assert!((gram.m[i][j] - want).abs() < 1e-12);
            }
        }
        // Isotropic w is refused: e₁+e₃ lies in a null eigenplane.
        assert!(matches!(
            quaternionic_frame(&g, &t, [1.0, 0.0, 1.0, 0.0]),
            Err(Error::Isotropic { .. })
        ));
    }
}
