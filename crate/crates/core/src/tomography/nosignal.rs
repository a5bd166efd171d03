use serde::Serialize;

use crate::error::{dim_err, Error, Result};
use crate::linalg::{eigh, hermitian_function, kron, partial_trace, CMatrix, Factor};
use crate::metric::MetricState;
use crate::scalar::{re, Real};

/// Bob's local operation does not change Alice's reduced state.
#[derive(Debug, Clone, Serialize)]
pub struct NoSignalling<T: Real> {
    pub holds: bool,
    /// `||sum_m tr_B(E_m rho) - tr_B(rho)||_F` for the POVM `E_m = I (x) Pi_m`.
    pub deviation: T,
    /// Same deviation for the post-measurement states
    /// `(I (x) sqrt Pi_m) rho (I (x) sqrt Pi_m)`.
    pub luders_deviation: T,
    /// Alice's reduced state `tr_B(rho)`.
    pub marginal: CMatrix<T>,
    /// Largest distance of a Hermitised POVM element from `I (x) Pi_m`.
    pub locality_residual: T,
}

const LOCALITY_TOL: f64 = 1e-8;

/// Checks no-signalling for Bob's POVM `{M_m}` given in the metric
/// representation. Each element is Hermitised with `eta` and must factor as
/// `I (x) Pi_m`.
pub fn verify_no_signalling<T: Real>(
    state: &MetricState<T>,
    dims: (usize, usize),
    povm: &[CMatrix<T>],
    tol: T,
) -> Result<NoSignalling<T>> {
    let (d1, d2) = dims;
    if d1 * d2 != state.dim() {
        return Err(dim_err(format!("{d1}x{d2} does not match state dimension {}", state.dim())));
    }
    if povm.is_empty() {
        return Err(Error::IncompletePovm { residual: 1.0 });
    }
    let metric = state.metric();
    let rho = state.hermitized();
    let id1 = CMatrix::identity(d1);
    let mut locality_residual = T::zero();
    let mut locals = Vec::with_capacity(povm.len());
    for (index, m) in povm.iter().enumerate() {
        m.expect_square(d1 * d2, "POVM element")?;
        let e = metric.hermitize(m)?;
        let pi = partial_trace(&e, dims, Factor::Second)?.scale_real(T::one() / T::lit(d1 as f64));
        let residual = (&e - &kron(&id1, &pi)).frobenius_norm() / T::one().max(e.frobenius_norm());
        if residual > T::lit(LOCALITY_TOL) {
            return Err(Error::NotLocalPovm { index, residual: residual.as_f64() });
        }
        locality_residual = locality_residual.max(residual);
        let pi = pi.hermitian_part();
        let (vals, _) = eigh(&pi);
        if vals[0] < -tol {
            return Err(Error::InvalidInput(format!("POVM element {index} is not positive")));
        }
        locals.push(pi);
    }
    let total = locals.iter().fold(CMatrix::zeros(d2, d2), |acc, p| &acc + p);
    let completeness = total.max_abs_diff(&CMatrix::identity(d2));
    if completeness > tol {
        return Err(Error::IncompletePovm { residual: completeness.as_f64() });
    }
    let marginal = partial_trace(&rho, dims, Factor::First)?;
    let mut summed = CMatrix::zeros(d1, d1);
    let mut luders = CMatrix::zeros(d1, d1);
    for pi in &locals {
        let e = kron(&id1, pi);
        summed += &partial_trace(&(&e * &rho), dims, Factor::First)?;
        let root = kron(&id1, &hermitian_function(pi, |x| re(x.max(T::zero()).sqrt())));
        luders += &partial_trace(&(&(&root * &rho) * &root), dims, Factor::First)?;
    }
    let deviation = (&summed - &marginal).frobenius_norm();
    let luders_deviation = (&luders - &marginal).frobenius_norm();
    Ok(NoSignalling {
        holds: deviation.max(luders_deviation) <= tol,
        deviation,
        luders_deviation,
        marginal,
        locality_residual,
    })
}
