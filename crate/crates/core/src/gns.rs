//! GNS construction for finite-dimensional matrix *-algebras.
//!
//! Algebra elements are concrete matrices. Each algebra keeps a basis that
//! is orthonormal in the Hilbert-Schmidt inner product, so coordinates are
//! plain inner products and structure constants never need to be stored.

use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{dim_err, Error, Result};
use crate::linalg::{eigh, fix_phase, kron, pinv, singular_values, vdot, vkron, CMatrix, CVector};
use crate::scalar::{Cx, Real};

/// Unital *-subalgebra of `M_n` with a Hilbert-Schmidt orthonormal basis.
#[derive(Debug, Clone)]
pub struct MatrixAlgebra<T: Real> {
    ambient_dim: usize,
    basis: Vec<CMatrix<T>>,
    generators: Vec<CMatrix<T>>,
}

/// Gram-Schmidt step: appends the normalized component of `a` orthogonal to
/// `basis` when it is larger than `tol * ||a||`.
fn try_extend<T: Real>(basis: &mut Vec<CMatrix<T>>, a: &CMatrix<T>, tol: T) -> bool {
    let norm = a.frobenius_norm();
    if norm == T::zero() {
        return false;
    }
    let mut r = a.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let c = b.hs_inner(&r);
            r -= &b.scale(c);
        }
    }
    let rn = r.frobenius_norm();
    if rn <= tol * norm {
        return false;
    }
    basis.push(r.scale_real(T::one() / rn));
    true
}

impl<T: Real> MatrixAlgebra<T> {
    /// Smallest unital *-algebra containing `generators`, found by adding
    /// adjoints and products until the span stops growing.
    pub fn close(generators: &[CMatrix<T>], tol: T) -> Result<Self> {
        let n = match generators.first() {
            Some(g) => g.rows(),
            None => return Err(Error::InvalidInput("at least one generator is required".into())),
        };
        for g in generators {
            g.expect_square(n, "generator")?;
            if !g.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let limit = n * n;
        let mut basis = Vec::new();
        try_extend(&mut basis, &CMatrix::identity(n), tol);
        for g in generators {
            try_extend(&mut basis, g, tol);
            try_extend(&mut basis, &g.adjoint(), tol);
        }
        let mut done = 0;
        while done < basis.len() {
            let fresh = basis.len();
            for i in 0..fresh {
                if i >= done {
                    let q = basis[i].adjoint();
                    try_extend(&mut basis, &q, tol);
                }
                for j in 0..fresh {
                    if i.max(j) < done {
                        continue;
                    }
                    let p = &basis[i] * &basis[j];
                    try_extend(&mut basis, &p, tol);
                    if basis.len() > limit {
                        return Err(Error::BasisOverflow(basis.len()));
                    }
                }
            }
            done = fresh;
        }
        Ok(Self { ambient_dim: n, basis, generators: generators.to_vec() })
    }

    /// The full matrix algebra `M_n` with the matrix-unit basis.
    pub fn full(n: usize) -> Self {
        let basis = (0..n * n)
            .map(|k| {
                let mut e = CMatrix::zeros(n, n);
                e[(k / n, k % n)] = Cx::one();
                e
            })
            .collect::<Vec<_>>();
        Self { ambient_dim: n, generators: basis.clone(), basis }
    }

    /// Algebra of operators `A (x) B` with `A` in `self` and `B` in `other`;
    /// basis element `i * other.dim() + j` is `b_i (x) c_j`.
    pub fn tensor(&self, other: &MatrixAlgebra<T>) -> Self {
        let basis = self.basis.iter().flat_map(|a| other.basis.iter().map(move |b| kron(a, b))).collect::<Vec<_>>();
        Self { ambient_dim: self.ambient_dim * other.ambient_dim, generators: basis.clone(), basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Number of basis elements.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMatrix<T>] {
        &self.basis
    }

    pub fn generators(&self) -> &[CMatrix<T>] {
        &self.generators
    }

    /// Coordinates of `a` and the norm of its component outside the algebra.
    pub fn expand(&self, a: &CMatrix<T>) -> Result<(CVector<T>, T)> {
        a.expect_square(self.ambient_dim, "algebra element")?;
        let coords: CVector<T> = self.basis.iter().map(|b| b.hs_inner(a)).collect();
        let back = self.combine(&coords);
        Ok((coords, (&back - a).frobenius_norm()))
    }

    /// Coordinates of `a`, rejecting elements outside the algebra.
    pub fn coordinates(&self, a: &CMatrix<T>, tol: T) -> Result<CVector<T>> {
        let (coords, residual) = self.expand(a)?;
        if residual > tol * a.frobenius_norm().max(T::one()) {
            return Err(Error::InvalidInput(format!(
                "operator lies outside the algebra (residual {:.3e})",
                residual.as_f64()
            )));
        }
        Ok(coords)
    }

    /// `sum_i c_i b_i`
    pub fn combine(&self, coords: &[Cx<T>]) -> CMatrix<T> {
        let n = self.ambient_dim;
        self.basis.iter().zip(coords).fold(CMatrix::zeros(n, n), |acc, (b, c)| &acc + &b.scale(*c))
    }

    /// Largest residual of re-expanding basis products and adjoints.
    pub fn closure_residual(&self) -> T {
        let mut worst = T::zero();
        for a in &self.basis {
            worst = worst.max(self.expand(&a.adjoint()).map(|r| r.1).unwrap_or_else(|_| T::infinity()));
            for b in &self.basis {
                worst = worst.max(self.expand(&(a * b)).map(|r| r.1).unwrap_or_else(|_| T::infinity()));
            }
        }
        worst
    }

    /// Matrix of left multiplication by `a` in basis coordinates.
    fn left_multiplication(&self, a: &CMatrix<T>) -> CMatrix<T> {
        let k = self.dim();
        let mut out = CMatrix::zeros(k, k);
        for (j, b) in self.basis.iter().enumerate() {
            let prod = a * b;
            for (i, bi) in self.basis.iter().enumerate() {
                out[(i, j)] = bi.hs_inner(&prod);
            }
        }
        out
    }
}

pub fn close_algebra<T: Real>(generators: &[CMatrix<T>], tol: T) -> Result<MatrixAlgebra<T>> {
    MatrixAlgebra::close(generators, tol)
}

/// Positive normalized linear functional, stored by its values on the basis.
#[derive(Debug, Clone)]
pub struct StateFunctional<T: Real> {
    algebra: Arc<MatrixAlgebra<T>>,
    values: CVector<T>,
}

impl<T: Real> StateFunctional<T> {
    /// Validates positivity of the Gram matrix and `omega(1) = 1`.
    pub fn new(algebra: Arc<MatrixAlgebra<T>>, values: CVector<T>, tol: T) -> Result<Self> {
        if values.len() != algebra.dim() {
            return Err(dim_err(format!(
                "{} state values for an algebra of dimension {}",
                values.len(),
                algebra.dim()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let omega = Self { algebra, values };
        let one = omega.evaluate(&CMatrix::identity(omega.algebra.ambient_dim()))?;
        if (one - Cx::one()).norm() > tol {
            return Err(Error::NotNormalized { value: format!("{one}") });
        }
        let gram = omega.gram();
        let scale = gram.frobenius_norm().max(T::one());
        let herm = (&gram - &gram.adjoint()).frobenius_norm();
        if herm > tol * scale {
            return Err(Error::InvalidInput(format!(
                "state functional is not Hermitian (residual {:.3e})",
                herm.as_f64()
            )));
        }
        let (vals, _) = eigh(&gram);
        if vals[0] < -tol * scale {
            return Err(Error::NotPositive { min_eigenvalue: vals[0].as_f64() });
        }
        Ok(omega)
    }

    /// `omega(A) = tr(rho A)`.
    pub fn from_density(algebra: Arc<MatrixAlgebra<T>>, rho: &CMatrix<T>, tol: T) -> Result<Self> {
        rho.expect_square(algebra.ambient_dim(), "density matrix")?;
        let values = algebra.basis().iter().map(|b| (rho * b).trace()).collect();
        Self::new(algebra, values, tol)
    }

    pub fn algebra(&self) -> &Arc<MatrixAlgebra<T>> {
        &self.algebra
    }

    pub fn values(&self) -> &[Cx<T>] {
        &self.values
    }

    fn evaluate_coords(&self, coords: &[Cx<T>]) -> Cx<T> {
        coords.iter().zip(&self.values).fold(Cx::zero(), |acc, (c, v)| acc + c * v)
    }

    /// `omega(A)` by linear extension; `A` must lie in the algebra.
    pub fn evaluate(&self, a: &CMatrix<T>) -> Result<Cx<T>> {
        let coords = self.algebra.coordinates(a, T::lit(1e-8))?;
        Ok(self.evaluate_coords(&coords))
    }

    /// `Gamma_ij = omega(b_i^dagger b_j)`.
    pub fn gram(&self) -> CMatrix<T> {
        let basis = self.algebra.basis();
        let k = basis.len();
        CMatrix::from_fn(k, k, |i, j| {
            let (coords, _) = self
                .algebra
                .expand(&(&basis[i].adjoint() * &basis[j]))
                .expect("basis elements share the ambient dimension");
            self.evaluate_coords(&coords)
        })
    }
}

/// Cyclic representation `(H, pi, Omega)` of a state.
#[derive(Debug, Clone)]
pub struct GnsRepresentation<T: Real> {
    algebra: Arc<MatrixAlgebra<T>>,
    rep: Vec<CMatrix<T>>,
    cyclic_vector: CVector<T>,
    quotient: CMatrix<T>,
    values: CVector<T>,
}

/// Diagnostics of a GNS representation; all residuals are maxima over basis
/// elements or basis pairs.
#[derive(Debug, Clone, Serialize)]
pub struct GnsSummary {
    pub hilbert_dim: usize,
    pub algebra_dim: usize,
    pub ambient_dim: usize,
    pub reconstruction_residual: f64,
    pub homomorphism_residual: f64,
    pub star_residual: f64,
    pub cyclic_rank: usize,
    pub density_in_span: bool,
    pub density_span_residual: f64,
}

/// Builds the GNS triple: the Gram matrix is diagonalized, its numerical
/// kernel (eigenvalues below `tol * max`) is quotiented out and the
/// remaining directions are whitened so the Hilbert space is Euclidean.
pub fn gns_construct<T: Real>(omega: &StateFunctional<T>, tol: T) -> Result<GnsRepresentation<T>> {
    let algebra = omega.algebra.clone();
    let gram = omega.gram().hermitian_part();
    let (vals, vecs) = eigh(&gram);
    let scale = vals.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    if vals[0] < -tol * scale.max(T::one()) {
        return Err(Error::NotPositive { min_eigenvalue: vals[0].as_f64() });
    }
    let k = algebra.dim();
    let kept: Vec<usize> = (0..k).rev().filter(|&i| vals[i] > tol * scale).collect();
    let r = kept.len();
    let mut quotient = CMatrix::zeros(r, k);
    let mut lift = CMatrix::zeros(k, r);
    for (row, &i) in kept.iter().enumerate() {
        let mut v = vecs.col(i);
        fix_phase(&mut v);
        let s = vals[i].sqrt();
        for (j, z) in v.iter().enumerate() {
            quotient[(row, j)] = z.conj() * s;
            lift[(j, row)] = *z / s;
        }
    }
    let rep = algebra.basis().iter().map(|b| &(&quotient * &algebra.left_multiplication(b)) * &lift).collect();
    let identity_coords = algebra.coordinates(&CMatrix::identity(algebra.ambient_dim()), T::lit(1e-8))?;
    let cyclic_vector = quotient.matvec(&identity_coords);
    Ok(GnsRepresentation { algebra, rep, cyclic_vector, quotient, values: omega.values.clone() })
}

impl<T: Real> GnsRepresentation<T> {
    pub fn hilbert_dim(&self) -> usize {
        self.cyclic_vector.len()
    }

    pub fn algebra(&self) -> &Arc<MatrixAlgebra<T>> {
        &self.algebra
    }

    /// `pi(b_i)` for every basis element, in basis order.
    pub fn basis_representation(&self) -> &[CMatrix<T>] {
        &self.rep
    }

    pub fn cyclic_vector(&self) -> &[Cx<T>] {
        &self.cyclic_vector
    }

    /// Map from algebra coordinates to Hilbert-space coordinates.
    pub fn quotient(&self) -> &CMatrix<T> {
        &self.quotient
    }

    fn represent_coords(&self, coords: &[Cx<T>]) -> CMatrix<T> {
        let d = self.hilbert_dim();
        self.rep.iter().zip(coords).fold(CMatrix::zeros(d, d), |acc, (p, c)| &acc + &p.scale(*c))
    }

    /// `pi(A)` for an algebra element.
    pub fn represent(&self, a: &CMatrix<T>) -> Result<CMatrix<T>> {
        let coords = self.algebra.coordinates(a, T::lit(1e-8))?;
        Ok(self.represent_coords(&coords))
    }

    /// `<Omega, pi(A) Omega>`
    pub fn vector_state(&self, a: &CMatrix<T>) -> Result<Cx<T>> {
        let pa = self.represent(a)?;
        Ok(vdot(&self.cyclic_vector, &pa.matvec(&self.cyclic_vector)))
    }

    /// `max_i |omega(b_i) - <Omega, pi(b_i) Omega>|`
    pub fn reconstruction_residual(&self) -> T {
        self.rep.iter().zip(&self.values).fold(T::zero(), |acc, (p, v)| {
            let w = vdot(&self.cyclic_vector, &p.matvec(&self.cyclic_vector));
            acc.max((w - v).norm())
        })
    }

    /// `max_ij ||pi(b_i b_j) - pi(b_i) pi(b_j)||_F`
    pub fn homomorphism_residual(&self) -> T {
        let basis = self.algebra.basis();
        let mut worst = T::zero();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let (coords, _) = self.algebra.expand(&(a * b)).expect("same ambient dimension");
                let lhs = self.represent_coords(&coords);
                let rhs = &self.rep[i] * &self.rep[j];
                worst = worst.max((&lhs - &rhs).frobenius_norm());
            }
        }
        worst
    }

    /// `max_i ||pi(b_i^dagger) - pi(b_i)^dagger||_F`
    pub fn star_residual(&self) -> T {
        let basis = self.algebra.basis();
        basis.iter().enumerate().fold(T::zero(), |acc, (i, b)| {
            let (coords, _) = self.algebra.expand(&b.adjoint()).expect("same ambient dimension");
            let lhs = self.represent_coords(&coords);
            acc.max((&lhs - &self.rep[i].adjoint()).frobenius_norm())
        })
    }

    /// Numerical rank of `[pi(b_1) Omega, ..., pi(b_k) Omega]`.
    pub fn cyclic_rank(&self, tol: T) -> usize {
        let cols: Vec<CVector<T>> = self.rep.iter().map(|p| p.matvec(&self.cyclic_vector)).collect();
        let m = CMatrix::from_columns(&cols);
        let s = singular_values(&m);
        let smax = s.first().copied().unwrap_or_else(T::zero);
        s.iter().filter(|&&v| v > tol * smax).count()
    }

    /// Whether `|Omega><Omega|` lies in the span of `pi(A)`, with the
    /// least-squares residual.
    pub fn density_in_span(&self, tol: T) -> (bool, T) {
        let d = self.hilbert_dim();
        let target = CMatrix::outer(&self.cyclic_vector, &self.cyclic_vector);
        let cols: Vec<CVector<T>> = self.rep.iter().map(|p| p.as_slice().to_vec()).collect();
        let a = CMatrix::from_columns(&cols);
        let x = pinv(&a, T::lit(1e-10)).matvec(target.as_slice());
        let fit = CMatrix::new(d, d, a.matvec(&x)).expect("shape follows from construction");
        let residual = (&fit - &target).frobenius_norm();
        (residual <= tol.sqrt(), residual)
    }

    pub fn summary(&self, tol: T) -> GnsSummary {
        let (density_in_span, residual) = self.density_in_span(tol);
        GnsSummary {
            hilbert_dim: self.hilbert_dim(),
            algebra_dim: self.algebra.dim(),
            ambient_dim: self.algebra.ambient_dim(),
            reconstruction_residual: self.reconstruction_residual().as_f64(),
            homomorphism_residual: self.homomorphism_residual().as_f64(),
            star_residual: self.star_residual().as_f64(),
            cyclic_rank: self.cyclic_rank(tol),
            density_in_span,
            density_span_residual: residual.as_f64(),
        }
    }
}

/// Representation of the tensor-product algebra on `H_1 (x) H_2` with the
/// product state; basis element `i * k_2 + j` is `b_i (x) c_j`.
pub fn product_representation<T: Real>(r1: &GnsRepresentation<T>, r2: &GnsRepresentation<T>) -> GnsRepresentation<T> {
    let algebra = Arc::new(r1.algebra.tensor(&r2.algebra));
    let rep = r1.rep.iter().flat_map(|a| r2.rep.iter().map(move |b| kron(a, b))).collect();
    let values = r1.values.iter().flat_map(|a| r2.values.iter().map(move |b| a * b)).collect();
    GnsRepresentation {
        algebra,
        rep,
        cyclic_vector: vkron(&r1.cyclic_vector, &r2.cyclic_vector),
        quotient: kron(&r1.quotient, &r2.quotient),
        values,
    }
}

#[cfg(test)]
mod tests;
