//! LU factorization with partial pivoting.

use num_traits::{One, Zero};

use super::matrix::{CMatrix, CVector};
use crate::error::{dim_err, Error, Result};
use crate::scalar::{Cx, Real};

pub struct Lu<T: Real> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &CMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(dim_err("LU factorization needs a square matrix"));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, _) = (k..n).map(|i| (i, lu[(i, k)].norm())).fold((k, T::neg_infinity()), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            if pivot.is_zero() {
                continue;
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    /// Smallest pivot modulus `|U_kk|`.
    pub fn min_pivot(&self) -> T {
        (0..self.lu.rows()).map(|k| self.lu[(k, k)].norm()).fold(T::infinity(), T::min)
    }

    pub fn solve_vec(&self, b: &[Cx<T>]) -> Result<CVector<T>> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(dim_err("right-hand side length mismatch"));
        }
        if self.min_pivot() == T::zero() {
            return Err(Error::InvalidInput("singular matrix".into()));
        }
        let mut x: CVector<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMatrix<T>> {
        let n = self.lu.rows();
        let mut out = CMatrix::zeros(n, n);
        let mut e = vec![Cx::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = Cx::zero());
            e[j] = Cx::one();
            let col = self.solve_vec(&e)?;
            out.set_col(j, &col);
        }
        Ok(out)
    }
}

/// Inverse of a square matrix; fails when a pivot vanishes relative to the
/// matrix scale.
pub fn inverse<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let lu = Lu::new(a)?;
    let scale = a.max_abs().max(T::min_positive_value());
    if lu.min_pivot() <= T::epsilon() * scale {
        return Err(Error::InvalidInput("matrix is numerically singular".into()));
    }
    lu.inverse()
}
