//! Dense 4x4 linear algebra over any [`Scalar`].
//!
//! Everything a chart needs is four-dimensional and small, so the
//! routines are direct: Gauss-Jordan with partial pivoting for inverses
//! and solves, LU for determinants, cyclic Jacobi for symmetric f64
//! eigenvalues. Pivoting uses `Scalar::magnitude`, which looks only at
//! value parts, so the same code propagates jets through inversions.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative pivot floor: a pivot this small against the matrix scale is
/// treated as singular.
const PIVOT_FLOOR: f64 = 1e-13;

pub type Vec4<T> = [T; 4];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4<T> {
    pub m: [[T; 4]; 4],
}

impl<T: Scalar> Mat4<T> {
    pub fn zeros() -> Self {
        Mat4 {
            m: [[T::zero(); 4]; 4],
        }
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            m.m[i][i] = T::one();
        }
        m
    }

    pub fn from_rows(rows: [[T; 4]; 4]) -> Self {
        Mat4 { m: rows }
    }

    /// Matrix whose `k`-th column is `cols[k]`.
    pub fn from_cols(cols: [[T; 4]; 4]) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.m[i][j] = cols[j][i];
            }
        }
        m
    }

    pub fn col(&self, j: usize) -> Vec4<T> {
        std::array::from_fn(|i| self.m[i][j])
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                t.m[i][j] = self.m[j][i];
            }
        }
        t
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut r = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                r.m[i][j] = self.m[i][j] + rhs.m[i][j];
            }
        }
        r
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut r = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                r.m[i][j] = self.m[i][j] - rhs.m[i][j];
            }
        }
        r
    }

    pub fn neg(&self) -> Self {
        let mut r = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                r.m[i][j] = -self.m[i][j];
            }
        }
        r
    }

    pub fn scale(&self, s: T) -> Self {
        let mut r = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                r.m[i][j] = self.m[i][j] * s;
            }
        }
        r
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut r = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = T::zero();
                for k in 0..4 {
                    acc = acc + self.m[i][k] * rhs.m[k][j];
                }
                r.m[i][j] = acc;
            }
        }
        r
    }

    pub fn matvec(&self, x: Vec4<T>) -> Vec4<T> {
        std::array::from_fn(|i| {
            let mut acc = T::zero();
            for k in 0..4 {
                acc = acc + self.m[i][k] * x[k];
            }
            acc
        })
    }

    /// Bilinear pairing `x^T M y`.
    pub fn pair(&self, x: Vec4<T>, y: Vec4<T>) -> T {
        let mut acc = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                acc = acc + x[i] * self.m[i][j] * y[j];
            }
        }
        acc
    }

    pub fn max_magnitude(&self) -> f64 {
        let mut m = 0.0_f64;
        for row in &self.m {
            for x in row {
                m = m.max(x.magnitude());
            }
        }
        m
    }

    /// Gauss-Jordan inverse with partial pivoting by magnitude.
    pub fn inverse(&self) -> Result<Self> {
        let scale = self.max_magnitude().max(f64::MIN_POSITIVE);
        let mut a = self.m;
        let mut inv = Self::identity().m;
        for col in 0..4 {
            let pivot_row = (col..4)
                .max_by(|&r, &s| {
                    a[r][col]
                        .magnitude()
                        .total_cmp(&a[s][col].magnitude())
                })
                .unwrap();
            if a[pivot_row][col].magnitude() <= PIVOT_FLOOR * scale {
                return Err(Error::Singular {
                    what: "4x4 inverse".into(),
                });
            }
            a.swap(col, pivot_row);
            inv.swap(col, pivot_row);
            let p = a[col][col];
            for j in 0..4 {
                a[col][j] = a[col][j] / p;
                inv[col][j] = inv[col][j] / p;
            }
            for r in 0..4 {
                if r == col {
                    continue;
                }
                let f = a[r][col];
                for j in 0..4 {
                    a[r][j] = a[r][j] - f * a[col][j];
                    inv[r][j] = inv[r][j] - f * inv[col][j];
                }
            }
        }
        Ok(Mat4 { m: inv })
    }

    pub fn solve(&self, b: Vec4<T>) -> Result<Vec4<T>> {
        Ok(self.inverse()?.matvec(b))
    }

    /// Solve A·X = B for the matrix X.
    pub fn solve_mat(&self, b: &Self) -> Result<Self> {
        Ok(self.inverse()?.mul(b))
    }

    /// Determinant via LU with partial pivoting.
    pub fn det(&self) -> T {
        let mut a = self.m;
        let mut det = T::one();
        for col in 0..4 {
            let pivot_row = (col..4)
                .max_by(|&r, &s| {
                    a[r][col]
                        .magnitude()
                        .total_cmp(&a[s][col].magnitude())
                })
                .unwrap();
            if a[pivot_row][col].magnitude() == 0.0 {
                return T::zero();
            }
            if pivot_row != col {
                a.swap(col, pivot_row);
                det = -det;
            }
            det = det * a[col][col];
            for r in (col + 1)..4 {
                let f = a[r][col] / a[col][col];
                for j in col..4 {
                    a[r][j] = a[r][j] - f * a[col][j];
                }
            }
        }
        det
    }

    /// Rank with pivots judged relative to the matrix scale.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let scale = self.max_magnitude();
        if scale == 0.0 {
            return 0;
        }
        let mut a = self.m;
        let mut rank = 0;
        for col in 0..4 {
            let pivot_row = (rank..4).max_by(|&r, &s| {
                a[r][col]
                    .magnitude()
                    .total_cmp(&a[s][col].magnitude())
            });
            let Some(pivot_row) = pivot_row else { break };
            if a[pivot_row][col].magnitude() <= rel_tol * scale {
                continue;
            }
            a.swap(rank, pivot_row);
            for r in (rank + 1)..4 {
                let f = a[r][col] / a[rank][col];
                for j in col..4 {
                    a[r][j] = a[r][j] - f * a[rank][j];
                }
            }
            rank += 1;
        }
        rank
    }
}

impl Mat4<f64> {
    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..4 {
            for j in (i + 1)..4 {
                if (self.m[i][j] - self.m[j][i]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi, ascending.
    pub fn sym_eigenvalues(&self) -> [f64; 4] {
        let mut a = self.m;
        let scale = self.max_magnitude().max(f64::MIN_POSITIVE);
        for _sweep in 0..64 {
            let mut off = 0.0;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    off += a[i][j] * a[i][j];
                }
            }
            if off.sqrt() < 1e-15 * scale {
                break;
            }
            for p in 0..4 {
                for q in (p + 1)..4 {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..4 {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..4 {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev = [a[0][0], a[1][1], a[2][2], a[3][3]];
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// (positive, negative, zero) eigenvalue counts of a symmetric
    /// matrix, with zeros decided relative to the matrix scale.
    pub fn signature(&self, rel_tol: f64) -> (usize, usize, usize) {
        let scale = self.max_magnitude().max(f64::MIN_POSITIVE);
        let ev = self.sym_eigenvalues();
        let mut pos = 0;
        let mut neg = 0;
        let mut zero = 0;
        for &e in &ev {
            if e > rel_tol * scale {
                pos += 1;
            } else if e < -rel_tol * scale {
                neg += 1;
            } else {
                zero += 1;
            }
        }
        (pos, neg, zero)
    }
}

pub fn vec_add<T: Scalar>(a: &Vec4<T>, b: &Vec4<T>) -> Vec4<T> {
    std::array::from_fn(|k| a[k] + b[k])
}

pub fn vec_sub<T: Scalar>(a: &Vec4<T>, b: &Vec4<T>) -> Vec4<T> {
    std::array::from_fn(|k| a[k] - b[k])
}

pub fn vec_scale<T: Scalar>(s: T, a: &Vec4<T>) -> Vec4<T> {
    std::array::from_fn(|k| s * a[k])
}

pub fn vec_max_magnitude<T: Scalar>(a: &Vec4<T>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.magnitude()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet;

    #[test]
    fn inverse_roundtrip_f64() {
        let a = Mat4::from_rows([
            [2.0, 1.0, 0.0, 3.0],
            [0.0, -1.0, 4.0, 1.0],
            [5.0, 0.0, 1.0, -2.0],
            [1.0, 1.0, 1.0, 1.0],
        ]);
        let inv = a.inverse().unwrap();
        let p = a.mul(&inv);
        let id = Mat4::<f64>::identity();
        for i in 0..4 {
            for j in 0..4 {
                assert!((p.m[i][j] - id.m[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let mut a = Mat4::<f64>::identity();
        a.m[3] = a.m[2];
        assert!(a.inverse().is_err());
        assert_eq!(a.rank(1e-10), 3);
        assert_eq!(a.det(), 0.0);
    }

    #[test]
    fn jet_inverse_matches_derivative_of_inverse() {
        // A(x) = [[1 + x0, x1], ...] embedded in 4x4; d(A^{-1}) = -A^{-1} A' A^{-1}.
        let entry = |i: usize, j: usize| -> Jet {
            if i == j {
                Jet::coordinate(i, 2.0 + i as f64) // depends on x_i
            } else {
                Jet::constant(0.3)
            }
        };
        let a = Mat4::from_rows(std::array::from_fn(|i| std::array::from_fn(|j| entry(i, j))));
        let inv = a.inverse().unwrap();

        let aval = Mat4::from_rows(a.m.map(|row| row.map(|x| x.v)));
        let ainv = aval.inverse().unwrap();
        for axis in 0..4 {
            let aprime = Mat4::from_rows(a.m.map(|row| row.map(|x| x.g[axis])));
            let expect = ainv.mul(&aprime).mul(&ainv).neg();
            for i in 0..4 {
                for j in 0..4 {
                    assert!(
                        (inv.m[i][j].g[axis] - expect.m[i][j]).abs() < 1e-12,
                        "axis {axis} entry ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn jacobi_signature_neutral() {
        let g = Mat4::from_rows([
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.5, 0.2],
            [0.0, 1.0, 0.2, -0.3],
        ]);
        assert_eq!(g.signature(1e-10), (2, 2, 0));
    }
}
