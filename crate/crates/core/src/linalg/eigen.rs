//! Non-Hermitian eigendecomposition via complex Schur form.
//!
//! The matrix is reduced to upper Hessenberg form with Householder
//! reflections, driven to upper triangular form by single-shift QR sweeps
//! with Wilkinson shifts, and eigenvectors are recovered by back
//! substitution on the triangular factor. Left eigenvectors come from the
//! inverse of the right-eigenvector matrix, so the returned system is
//! biorthonormal by construction.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use super::lu::Lu;
use super::matrix::{vdot, vnorm, CMatrix, CVector};
use crate::error::{dim_err, Error, Result};
use crate::scalar::{Cx, Real};

/// Eigenvalue with its right and left eigenvectors, normalized so that
/// `left^dagger right = 1` and `||right|| = 1`.
#[derive(Debug, Clone)]
pub struct EigenPair<T: Real> {
    pub value: Cx<T>,
    pub right: CVector<T>,
    pub left: CVector<T>,
}

/// Complex Schur decomposition `A = Z T Z^dagger`.
pub struct Schur<T: Real> {
    pub z: CMatrix<T>,
    pub t: CMatrix<T>,
}

const MAX_ITER_PER_EIGENVALUE: usize = 60;

fn householder_hessenberg<T: Real>(a: &CMatrix<T>) -> (CMatrix<T>, CMatrix<T>) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Cx<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = vnorm(&x);
        if xnorm == T::zero() {
            continue;
        }
        let x0 = x[0];
        let ph = if x0.norm() == T::zero() { Cx::one() } else { x0 / x0.norm() };
        let alpha = -ph * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vn = vnorm(&v);
        if vn == T::zero() {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vn);
        // H <- P H P with P = I - 2 v v^dagger acting on indices k+1..n.
        for j in 0..n {
            let mut s = Cx::zero();
            for (idx, i) in (k + 1..n).enumerate() {
                s += v[idx].conj() * h[(i, j)];
            }
            let s2 = s * T::lit(2.0);
            for (idx, i) in (k + 1..n).enumerate() {
                let vi = v[idx];
                h[(i, j)] -= vi * s2;
            }
        }
        for mat in [&mut h, &mut q] {
            for i in 0..n {
                let mut s = Cx::zero();
                for (idx, j) in (k + 1..n).enumerate() {
                    s += mat[(i, j)] * v[idx];
                }
                let s2 = s * T::lit(2.0);
                for (idx, j) in (k + 1..n).enumerate() {
                    let vj = v[idx].conj();
                    mat[(i, j)] -= s2 * vj;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Cx::zero();
        }
    }
    (h, q)
}

/// Givens rotation `G = [[c, s], [-conj(s), c]]` with `G [a; b] = [r; 0]`.
fn givens<T: Real>(a: Cx<T>, b: Cx<T>) -> (T, Cx<T>) {
    if b.norm() == T::zero() {
        return (T::one(), Cx::zero());
    }
    if a.norm() == T::zero() {
        return (T::zero(), b.conj() / b.norm());
    }
    let r = a.norm().hypot(b.norm());
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

fn wilkinson_shift<T: Real>(a: Cx<T>, b: Cx<T>, c: Cx<T>, d: Cx<T>) -> Cx<T> {
    let half = T::lit(0.5);
    let tr_half = (a + d) * half;
    let disc = ((a - d) * half * ((a - d) * half) + b * c).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur decomposition of a square matrix.
pub fn schur<T: Real>(a: &CMatrix<T>) -> Result<Schur<T>> {
    if !a.is_square() {
        return Err(dim_err("Schur decomposition needs a square matrix"));
    }
    let n = a.rows();
    let (mut h, mut z) = householder_hessenberg(a);
    if n == 1 {
        return Ok(Schur { z, t: h });
    }
    let eps = T::epsilon();
    let norm = h.frobenius_norm().max(T::min_positive_value());
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        // Locate the start of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let scale = if diag == T::zero() { norm } else { diag };
            if sub <= eps * scale {
                h[(lo, lo - 1)] = Cx::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > MAX_ITER_PER_EIGENVALUE * n {
            return Err(Error::NoConvergence);
        }
        let mu = if iter % 11 == 10 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + Cx::new(h[(hi, hi - 1)].norm() * T::lit(0.75), h[(hi, hi - 1)].norm())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = Cx::zero();
            rots.push((c, s));
        }
        for (offset, &(c, s)) in rots.iter().enumerate() {
            let k = lo + offset;
            for i in 0..=(k + 1) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
            for i in 0..n {
                let x = z[(i, k)];
                let y = z[(i, k + 1)];
                z[(i, k)] = x * c + y * s.conj();
                z[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = Cx::zero();
        }
    }
    Ok(Schur { z, t: h })
}

fn cmp_complex<T: Real>(a: &Cx<T>, b: &Cx<T>) -> Ordering {
    a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal).then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// Right eigenvectors of an upper triangular matrix (columns of the result).
fn triangular_eigenvectors<T: Real>(t: &CMatrix<T>) -> CMatrix<T> {
    let n = t.rows();
    let smin = (T::epsilon() * t.frobenius_norm()).max(T::min_positive_value());
    let mut x = CMatrix::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        x[(k, k)] = Cx::one();
        for i in (0..k).rev() {
            let mut s = Cx::<T>::zero();
            for j in i + 1..=k {
                s += t[(i, j)] * x[(j, k)];
            }
            let mut d = t[(i, i)] - lam;
            if d.norm() < smin {
                d = Cx::new(smin, T::zero());
            }
            x[(i, k)] = -s / d;
        }
    }
    x
}

/// Full eigendecomposition of a diagonalizable matrix.
///
/// Eigenvalues are sorted by (real part, imaginary part). Right vectors have
/// unit norm; within clusters of numerically equal eigenvalues they are
/// orthonormalized. The matrix is rejected as defective when the LU
/// factorization of the right-eigenvector matrix has a pivot below `tol`.
pub fn eig_general<T: Real>(m: &CMatrix<T>, tol: T) -> Result<Vec<EigenPair<T>>> {
    if !m.is_square() {
        return Err(dim_err("eigendecomposition needs a square matrix"));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.rows();
    let Schur { z, t } = schur(m)?;
    let xt = triangular_eigenvectors(&t);
    let vecs = &z * &xt;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| cmp_complex(&t[(i, i)], &t[(j, j)]));
    let values: Vec<Cx<T>> = order.iter().map(|&i| t[(i, i)]).collect();
    let mut right: Vec<CVector<T>> = order.iter().map(|&i| vecs.col(i)).collect();
    for v in right.iter_mut() {
        let nv = vnorm(v);
        v.iter_mut().for_each(|z| *z /= nv);
    }

    // Orthonormalize within eigenvalue clusters.
    let scale = m.frobenius_norm().max(T::min_positive_value());
    let cluster_tol = T::lit(1e-8) * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[end] - values[start]).norm() <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            // A defective cluster collapses onto fewer directions than its
            // multiplicity; orthonormalizing would hide that, so each
            // resulting vector must still be an eigenvector.
            let residual_cap = tol.sqrt().max(T::lit(1e-6)) * scale;
            for a in start..end {
                for b in start..a {
                    let proj = vdot(&right[b], &right[a]);
                    let rb = right[b].clone();
                    for (x, y) in right[a].iter_mut().zip(&rb) {
                        *x -= proj * y;
                    }
                }
                let nv = vnorm(&right[a]);
                if nv > T::zero() {
                    right[a].iter_mut().for_each(|z| *z /= nv);
                }
                let mv = m.matvec(&right[a]);
                let res = mv
                    .iter()
                    .zip(&right[a])
                    .fold(T::zero(), |acc, (x, y)| acc + (*x - values[a] * y).norm_sqr())
                    .sqrt();
                if !(nv > T::zero()) || res > residual_cap {
                    return Err(Error::NonDiagonalizable { pivot: 0.0, threshold: tol.as_f64() });
                }
            }
        }
        start = end;
    }

    let vmat = CMatrix::from_columns(&right);
    let lu = Lu::new(&vmat)?;
    let pivot = lu.min_pivot();
    if !(pivot >= tol) {
        return Err(Error::NonDiagonalizable { pivot: pivot.as_f64(), threshold: tol.as_f64() });
    }
    let vinv = lu.inverse()?;
    Ok((0..n)
        .map(|i| EigenPair {
            value: values[i],
            right: right[i].clone(),
            left: vinv.row(i).iter().map(|z| z.conj()).collect(),
        })
        .collect())
}

/// Eigenvalues only, sorted by (real, imaginary).
pub fn eigenvalues<T: Real>(m: &CMatrix<T>) -> Result<Vec<Cx<T>>> {
    let Schur { t, .. } = schur(m)?;
    let mut vals: Vec<Cx<T>> = (0..t.rows()).map(|i| t[(i, i)]).collect();
    vals.sort_by(cmp_complex);
    Ok(vals)
}
