//! Metric operators, Hermitisation and maps between metric Hilbert spaces.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::linalg::{
    eig_general, eigh, hermitian_function, inverse, singular_values, sqrt_pd, unitarity_residual, CMatrix,
};
use crate::scalar::{re, Cx, Real};

/// Inner-product structure `<u, v>_G = u^dagger G v` with cached `eta = sqrt(G)`.
#[derive(Clone, PartialEq)]
pub struct Metric<T: Real> {
    g: CMatrix<T>,
    eta: CMatrix<T>,
    eta_inv: CMatrix<T>,
    g_inv: CMatrix<T>,
}

impl<T: Real> std::fmt::Debug for Metric<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Metric").field("g", &self.g).finish()
    }
}

impl<T: Real> Serialize for Metric<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.g.serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Metric<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let g = CMatrix::<T>::deserialize(d)?;
        Metric::new(g, T::lit(crate::DEFAULT_TOL)).map_err(serde::de::Error::custom)
    }
}

/// Outcome of a quasi-Hermiticity test; `residual` is
/// `||O^dagger G - G O|| / (||G|| ||O||)` in operator 2-norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiHermiticity<T: Real> {
    pub holds: bool,
    pub residual: T,
}

impl<T: Real> Metric<T> {
    /// Validates `g` as Hermitian positive definite and caches its roots.
    pub fn new(g: CMatrix<T>, tol: T) -> Result<Self> {
        let eta = sqrt_pd(&g, tol)?;
        let eta_inv = hermitian_function(&g, |x| re(T::one() / x.sqrt())).hermitian_part();
        let g_inv = hermitian_function(&g, |x| re(T::one() / x)).hermitian_part();
        let g = g.hermitian_part();
        Ok(Self { g, eta, eta_inv, g_inv })
    }

    /// Euclidean metric on `C^n`.
    pub fn identity(n: usize) -> Self {
        let i = CMatrix::identity(n);
        Self { g: i.clone(), eta: i.clone(), eta_inv: i.clone(), g_inv: i }
    }

    /// Metric `G = eta^2` for a given Hermitian positive-definite `eta`.
    pub fn from_eta(eta: &CMatrix<T>, tol: T) -> Result<Self> {
        let (vals, _) = eigh(eta);
        if !(vals[0] > T::zero()) || eta.hermiticity_residual() > tol * eta.norm2() {
            return Err(Error::InvalidInput("eta must be Hermitian positive definite".into()));
        }
        Self::new(eta * eta, tol)
    }

    pub fn dim(&self) -> usize {
        self.g.rows()
    }

    pub fn g(&self) -> &CMatrix<T> {
        &self.g
    }

    pub fn eta(&self) -> &CMatrix<T> {
        &self.eta
    }

    pub fn eta_inv(&self) -> &CMatrix<T> {
        &self.eta_inv
    }

    pub fn g_inv(&self) -> &CMatrix<T> {
        &self.g_inv
    }

    pub fn is_euclidean(&self, tol: T) -> bool {
        self.g.max_abs_diff(&CMatrix::identity(self.dim())) <= tol
    }

    fn check(&self, o: &CMatrix<T>) -> Result<()> {
        o.expect_square(self.dim(), "operator")
    }

    /// `<u, v>_G`
    pub fn inner(&self, u: &[Cx<T>], v: &[Cx<T>]) -> Cx<T> {
        crate::linalg::vdot(u, &self.g.matvec(v))
    }

    /// `<v, v>_G`
    pub fn norm_sqr(&self, v: &[Cx<T>]) -> T {
        self.inner(v, v).re
    }

    /// G-Hilbert-Schmidt pairing `tr(A* B)` with `A*` the G-adjoint.
    pub fn hs_inner(&self, a: &CMatrix<T>, b: &CMatrix<T>) -> Result<Cx<T>> {
        Ok((&self.g_adjoint(a)? * b).trace())
    }

    /// `eta O eta^-1`
    pub fn hermitize(&self, o: &CMatrix<T>) -> Result<CMatrix<T>> {
        self.check(o)?;
        Ok(&(&self.eta * o) * &self.eta_inv)
    }

    /// `eta^-1 O eta`, the inverse of [`Metric::hermitize`].
    pub fn dehermitize(&self, o: &CMatrix<T>) -> Result<CMatrix<T>> {
        self.check(o)?;
        Ok(&(&self.eta_inv * o) * &self.eta)
    }

    /// `G^-1 O^dagger G`
    pub fn g_adjoint(&self, o: &CMatrix<T>) -> Result<CMatrix<T>> {
        self.check(o)?;
        Ok(&(&self.g_inv * &o.adjoint()) * &self.g)
    }

    /// Tests `O^dagger G = G O` relative to `||G|| ||O||`.
    pub fn quasi_hermiticity(&self, o: &CMatrix<T>, tol: T) -> Result<QuasiHermiticity<T>> {
        self.check(o)?;
        let diff = &(&o.adjoint() * &self.g) - &(&self.g * o);
        let scale = self.g.norm2() * o.norm2();
        let residual = if scale > T::zero() { diff.norm2() / scale } else { T::zero() };
        Ok(QuasiHermiticity { holds: residual <= tol, residual })
    }
}

/// Most general metric `G = sum_i lambda_i L_i L_i^dagger` built from the
/// left eigenvectors `L_i` of a diagonalizable `H` with real spectrum.
///
/// Eigenpairs are ordered by (real, imaginary) part, right eigenvectors
/// carry unit norm and `L_i^dagger R_i = 1`; `lambda[i]` weights the `i`-th
/// pair in that order.
pub fn metric_from_hamiltonian<T: Real>(h: &CMatrix<T>, lambda: &[T], tol: T) -> Result<Metric<T>> {
    if !h.is_square() {
        return Err(dim_err("Hamiltonian must be square"));
    }
    if lambda.len() != h.rows() {
        return Err(dim_err(format!("lambda has {} entries for dimension {}", lambda.len(), h.rows())));
    }
    if lambda.iter().any(|l| !(*l > T::zero()) || !l.is_finite()) {
        return Err(Error::NonPositiveLambda);
    }
    let pairs = eig_general(h, tol)?;
    let scale = h.norm2().max(T::one());
    if let Some(p) = pairs.iter().find(|p| p.value.im.abs() > tol * scale) {
        return Err(Error::ComplexSpectrum { imag: p.value.im.as_f64() });
    }
    let n = h.rows();
    let g = pairs
        .iter()
        .zip(lambda)
        .fold(CMatrix::zeros(n, n), |acc, (p, &l)| &acc + &CMatrix::outer(&p.left, &p.left).scale_real(l));
    Metric::new(g.hermitian_part(), tol)
}

pub fn is_quasi_hermitian<T: Real>(o: &CMatrix<T>, m: &Metric<T>, tol: T) -> Result<QuasiHermiticity<T>> {
    m.quasi_hermiticity(o, tol)
}

pub fn hermitize<T: Real>(o: &CMatrix<T>, m: &Metric<T>) -> Result<CMatrix<T>> {
    m.hermitize(o)
}

pub fn g_adjoint<T: Real>(o: &CMatrix<T>, m: &Metric<T>) -> Result<CMatrix<T>> {
    m.g_adjoint(o)
}

/// Certificate for a linear map `T` from `(C^n, G')` to `(C^n, G)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapCertificate<T: Real> {
    pub isometry: bool,
    pub unitary: bool,
    /// `||T^dagger G T - G'||_F / ||G'||_F`
    pub residual: T,
}

/// Checks `T^dagger G T = G'` (isometry) and invertibility (unitary).
pub fn check_metric_map<T: Real>(
    t: &CMatrix<T>,
    source: &Metric<T>,
    target: &Metric<T>,
    tol: T,
) -> Result<MapCertificate<T>> {
    let n = source.dim();
    if target.dim() != n {
        return Err(dim_err("source and target metrics differ in dimension"));
    }
    t.expect_square(n, "map")?;
    let pulled = &(&t.adjoint() * target.g()) * t;
    let residual = (&pulled - source.g()).frobenius_norm() / source.g().frobenius_norm();
    let isometry = residual <= tol;
    let sv = singular_values(t);
    let invertible = sv.last().copied().unwrap_or_else(T::zero) > tol * sv[0];
    Ok(MapCertificate { isometry, unitary: isometry && invertible, residual })
}

/// Invertible map `T` from the `source` metric space `G'` to the `target`
/// space `G`, together with its certificate.
#[derive(Debug, Clone)]
pub struct MetricMap<T: Real> {
    t: CMatrix<T>,
    t_inv: CMatrix<T>,
    source: Arc<Metric<T>>,
    target: Arc<Metric<T>>,
    certificate: MapCertificate<T>,
}

impl<T: Real> MetricMap<T> {
    /// Certifies `t`; fails with [`Error::NotIntertwiner`] unless it is unitary.
    pub fn new(t: CMatrix<T>, source: Arc<Metric<T>>, target: Arc<Metric<T>>, tol: T) -> Result<Self> {
        let certificate = check_metric_map(&t, &source, &target, tol)?;
        if !certificate.unitary {
            return Err(Error::NotIntertwiner { residual: certificate.residual.as_f64() });
        }
        let t_inv = inverse(&t)?;
        Ok(Self { t, t_inv, source, target, certificate })
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.t
    }

    pub fn inverse_matrix(&self) -> &CMatrix<T> {
        &self.t_inv
    }

    pub fn source(&self) -> &Arc<Metric<T>> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Metric<T>> {
        &self.target
    }

    pub fn certificate(&self) -> MapCertificate<T> {
        self.certificate
    }

    /// `T^-1 O T`: an operator on the target space seen from the source.
    pub fn pull_operator(&self, o: &CMatrix<T>) -> Result<CMatrix<T>> {
        o.expect_square(self.t.rows(), "operator")?;
        Ok(&(&self.t_inv * o) * &self.t)
    }

    /// `T O' T^-1`: an operator on the source space pushed to the target.
    pub fn push_operator(&self, o: &CMatrix<T>) -> Result<CMatrix<T>> {
        o.expect_square(self.t.rows(), "operator")?;
        Ok(&(&self.t * o) * &self.t_inv)
    }

    /// Moves a state on the target metric to the source metric.
    pub fn pull_state(&self, state: &MetricState<T>) -> Result<MetricState<T>> {
        if **state.metric() != *self.target {
            return Err(Error::InvalidState("state does not live on the map's target metric".into()));
        }
        Ok(MetricState { rho_bar: self.pull_operator(state.rho_bar())?, metric: self.source.clone() })
    }

    /// Moves a state on the source metric to the target metric.
    pub fn push_state(&self, state: &MetricState<T>) -> Result<MetricState<T>> {
        if **state.metric() != *self.source {
            return Err(Error::InvalidState("state does not live on the map's source metric".into()));
        }
        Ok(MetricState { rho_bar: self.push_operator(state.rho_bar())?, metric: self.target.clone() })
    }

    /// Composition `self . other`: `other` maps `G''` to `G'`, `self` maps `G'` to `G`.
    pub fn compose(&self, other: &MetricMap<T>, tol: T) -> Result<MetricMap<T>> {
        if *other.target != *self.source {
            return Err(dim_err("maps do not compose: intermediate metrics differ"));
        }
        MetricMap::new(&self.t * &other.t, other.source.clone(), self.target.clone(), tol)
    }

    /// The inverse map from target back to source.
    pub fn invert(&self, tol: T) -> Result<MetricMap<T>> {
        MetricMap::new(self.t_inv.clone(), self.target.clone(), self.source.clone(), tol)
    }
}

/// `T_U = eta^-1 U^dagger eta'`, the intertwiner from `G'` to `G` induced by a
/// Euclidean unitary `U` through `eta' T_U^-1 = U eta`.
pub fn intertwiner_from_unitary<T: Real>(
    u: &CMatrix<T>,
    source: Arc<Metric<T>>,
    target: Arc<Metric<T>>,
    tol: T,
) -> Result<MetricMap<T>> {
    let n = source.dim();
    u.expect_square(n, "unitary")?;
    let residual = unitarity_residual(u);
    if residual > tol * T::lit(n as f64) {
        return Err(Error::NotUnitary { residual: residual.as_f64() });
    }
    let t = &(target.eta_inv() * &u.adjoint()) * source.eta();
    MetricMap::new(t, source, target, tol)
}

/// Density operator `rho_bar = eta^-1 rho eta` relative to a metric.
#[derive(Debug, Clone)]
pub struct MetricState<T: Real> {
    rho_bar: CMatrix<T>,
    metric: Arc<Metric<T>>,
}

fn validate_density<T: Real>(rho: &CMatrix<T>, tol: T) -> Result<()> {
    let herm = rho.hermiticity_residual();
    let scale = rho.frobenius_norm().max(T::one());
    if herm > tol * scale {
        return Err(Error::InvalidState(format!("Hermitised state is not Hermitian (residual {herm})")));
    }
    let (vals, _) = eigh(rho);
    if vals[0] < -tol * scale {
        return Err(Error::NotPositive { min_eigenvalue: vals[0].as_f64() });
    }
    let tr = rho.trace();
    if (tr - re(T::one())).norm() > tol * scale {
        return Err(Error::NotNormalized { value: format!("{tr}") });
    }
    Ok(())
}

impl<T: Real> MetricState<T> {
    /// State whose Hermitisation is the given density matrix `rho`.
    pub fn from_euclidean(rho: &CMatrix<T>, metric: Arc<Metric<T>>, tol: T) -> Result<Self> {
        rho.expect_square(metric.dim(), "density matrix")?;
        validate_density(rho, tol)?;
        let rho_bar = metric.dehermitize(&rho.hermitian_part())?;
        Ok(Self { rho_bar, metric })
    }

    /// Pure state `eta^-1 |psi><psi| eta` for a Euclidean unit vector `psi`.
    pub fn from_pure(psi: &[Cx<T>], metric: Arc<Metric<T>>, tol: T) -> Result<Self> {
        Self::from_euclidean(&CMatrix::outer(psi, psi), metric, tol)
    }

    /// Validates a state given directly in metric form.
    pub fn new(rho_bar: CMatrix<T>, metric: Arc<Metric<T>>, tol: T) -> Result<Self> {
        rho_bar.expect_square(metric.dim(), "state")?;
        let rho = metric.hermitize(&rho_bar)?;
        validate_density(&rho, tol)?;
        Ok(Self { rho_bar, metric })
    }

    pub fn rho_bar(&self) -> &CMatrix<T> {
        &self.rho_bar
    }

    pub fn metric(&self) -> &Arc<Metric<T>> {
        &self.metric
    }

    pub fn dim(&self) -> usize {
        self.rho_bar.rows()
    }

    /// `rho = eta rho_bar eta^-1`, symmetrized.
    pub fn hermitized(&self) -> CMatrix<T> {
        (&(self.metric.eta() * &self.rho_bar) * self.metric.eta_inv()).hermitian_part()
    }

    /// `tr(rho^2)`
    pub fn purity(&self) -> T {
        let rho = self.hermitized();
        (&rho * &rho).trace().re
    }

    /// `||G^-1 rho_bar^dagger G - rho_bar||_F`
    pub fn self_adjointness_residual(&self) -> T {
        let adj = &(self.metric.g_inv() * &self.rho_bar.adjoint()) * self.metric.g();
        (&adj - &self.rho_bar).frobenius_norm()
    }
}

/// `tr(O* rho_bar)` with `O*` the G-adjoint.
pub fn expectation<T: Real>(o: &CMatrix<T>, state: &MetricState<T>) -> Result<Cx<T>> {
    Ok((&state.metric.g_adjoint(o)? * &state.rho_bar).trace())
}
