//! Jacobi-rotation kernels: Hermitian eigendecomposition and one-sided SVD.

use num_traits::Zero;

use super::matrix::{vdot, vnorm, CMatrix};
use crate::scalar::{Cx, Real};

const MAX_SWEEPS: usize = 100;

/// Unitary 2x2 rotation `J = [[c, s], [-s conj(e), c conj(e)]]` that
/// diagonalizes the Hermitian block `[[a, b], [conj(b), d]]` via `J^dagger A J`.
#[derive(Clone, Copy)]
struct Rotation<T: Real> {
    c: T,
    s: T,
    e: Cx<T>,
}

impl<T: Real> Rotation<T> {
    fn for_block(a: T, b: Cx<T>, d: T) -> Option<Self> {
        let babs = b.norm();
        if babs == T::zero() {
            return None;
        }
        let e = b / babs;
        let theta = (d - a) / (T::lit(2.0) * babs);
        let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
        let c = T::one() / (t * t + T::one()).sqrt();
        Some(Self { c, s: t * c, e })
    }

    // Entries of J.
    fn jpp(&self) -> Cx<T> {
        Cx::new(self.c, T::zero())
    }
    fn jpq(&self) -> Cx<T> {
        Cx::new(self.s, T::zero())
    }
    fn jqp(&self) -> Cx<T> {
        -self.e.conj() * self.s
    }
    fn jqq(&self) -> Cx<T> {
        self.e.conj() * self.c
    }

    /// Columns `p, q` of `m` <- `m J`.
    fn apply_right(&self, m: &mut CMatrix<T>, p: usize, q: usize) {
        let (jpp, jpq, jqp, jqq) = (self.jpp(), self.jpq(), self.jqp(), self.jqq());
        for k in 0..m.rows() {
            let x = m[(k, p)];
            let y = m[(k, q)];
            m[(k, p)] = x * jpp + y * jqp;
            m[(k, q)] = x * jpq + y * jqq;
        }
    }

    /// Rows `p, q` of `m` <- `J^dagger m`.
    fn apply_left_adjoint(&self, m: &mut CMatrix<T>, p: usize, q: usize) {
        let (jpp, jpq, jqp, jqq) = (self.jpp(), self.jpq(), self.jqp(), self.jqq());
        for k in 0..m.cols() {
            let x = m[(p, k)];
            let y = m[(q, k)];
            m[(p, k)] = jpp.conj() * x + jqp.conj() * y;
            m[(q, k)] = jpq.conj() * x + jqq.conj() * y;
        }
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and a unitary matrix whose columns
/// are the matching eigenvectors. Only the Hermitian part of `a` is used.
pub fn eigh<T: Real>(a: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    assert!(a.is_square(), "eigh needs a square matrix");
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius_norm();
    if scale == T::zero() {
        return (vec![T::zero(); n], v);
    }
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .fold(T::zero(), |acc, (i, j)| acc + m[(i, j)].norm_sqr())
            .sqrt();
        if off <= eps * eps * scale || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = m[(p, q)];
                if b.norm() <= eps * eps * scale {
                    continue;
                }
                if let Some(rot) = Rotation::for_block(m[(p, p)].re, b, m[(q, q)].re) {
                    rot.apply_right(&mut m, p, q);
                    rot.apply_left_adjoint(&mut m, p, q);
                    m[(p, q)] = Cx::zero();
                    m[(q, p)] = Cx::zero();
                    m[(p, p)] = Cx::new(m[(p, p)].re, T::zero());
                    m[(q, q)] = Cx::new(m[(q, q)].re, T::zero());
                    rot.apply_right(&mut v, p, q);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.partial_cmp(&m[(j, j)].re).unwrap());
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    (values, vectors)
}

/// Thin singular value decomposition `A = U diag(s) V^dagger`.
pub struct Svd<T: Real> {
    /// `m x k` with orthonormal columns for nonzero singular values.
    pub u: CMatrix<T>,
    /// Descending, length `k = min(m, n)`.
    pub s: Vec<T>,
    /// `n x k` with orthonormal columns.
    pub v: CMatrix<T>,
}

/// One-sided (Hestenes) Jacobi SVD; accurate for small singular values.
pub fn svd<T: Real>(a: &CMatrix<T>) -> Svd<T> {
    if a.rows() < a.cols() {
        let t = svd_tall(&a.adjoint());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    svd_tall(a)
}

fn svd_tall<T: Real>(a: &CMatrix<T>) -> Svd<T> {
    let (m, n) = a.shape();
    let mut v = CMatrix::identity(n);
    let eps = T::epsilon();
    let mut cols: Vec<Vec<Cx<T>>> = (0..n).map(|j| a.col(j)).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = cols[p].iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
                let beta = cols[q].iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
                let gamma = vdot(&cols[p], &cols[q]);
                if gamma.norm() <= eps * (alpha * beta).sqrt() || gamma.norm() == T::zero() {
                    continue;
                }
                if let Some(rot) = Rotation::for_block(alpha, gamma, beta) {
                    rotated = true;
                    let (jpp, jpq, jqp, jqq) = (rot.jpp(), rot.jpq(), rot.jqp(), rot.jqq());
                    #[allow(clippy::needless_range_loop)]
                    for k in 0..m {
                        let x = cols[p][k];
                        let y = cols[q][k];
                        cols[p][k] = x * jpp + y * jqp;
                        cols[q][k] = x * jpq + y * jqq;
                    }
                    rot.apply_right(&mut v, p, q);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<T> = cols.iter().map(|c| vnorm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let s: Vec<T> = order.iter().map(|&j| norms[j]).collect();
    let smax = s.first().copied().unwrap_or_else(T::zero);
    let mut w = CMatrix::zeros(m, n);
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > smax * eps * T::lit(1e-3) && norms[j] > T::zero() {
            let inv = T::one() / norms[j];
            for i in 0..m {
                w[(i, k)] = cols[j][i] * inv;
            }
        }
    }
    let v_sorted = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Svd { u: w, s, v: v_sorted }
}

pub fn singular_values<T: Real>(a: &CMatrix<T>) -> Vec<T> {
    svd(a).s
}

/// Moore-Penrose pseudo-inverse with relative cutoff `rcond`.
pub fn pinv<T: Real>(a: &CMatrix<T>, rcond: T) -> CMatrix<T> {
    let Svd { u, s, v } = svd(a);
    let smax = s.first().copied().unwrap_or_else(T::zero);
    let mut out = CMatrix::zeros(a.cols(), a.rows());
    for (k, &sk) in s.iter().enumerate() {
        if sk <= rcond * smax || sk == T::zero() {
            continue;
        }
        let inv = Cx::new(T::one() / sk, T::zero());
        for i in 0..a.cols() {
            let vik = v[(i, k)] * inv;
            for j in 0..a.rows() {
                out[(i, j)] += vik * u[(j, k)].conj();
            }
        }
    }
    out
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_function<T: Real>(a: &CMatrix<T>, f: impl Fn(T) -> Cx<T>) -> CMatrix<T> {
    let (vals, vecs) = eigh(a);
    let n = a.rows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        let fk = f(lam);
        for i in 0..n {
            let vik = vecs[(i, k)] * fk;
            for j in 0..n {
                out[(i, j)] += vik * vecs[(j, k)].conj();
            }
        }
    }
    out
}
