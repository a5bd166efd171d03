use std::sync::Arc;

use num_traits::Zero;

use super::spin::MeasurementRecord;
use crate::error::{dim_err, Error, Result};
use crate::linalg::{eigh, kron, pauli_digits, pauli_string, singular_values, CMatrix, Lu};
use crate::metric::{expectation, Metric, MetricState};
use crate::scalar::{Cx, Real};

/// Frames whose sampling operator has a larger condition number are
/// rejected for reconstruction.
pub const MAX_CONDITION: f64 = 1e12;

/// Weighted operator family `{(w_i, e_i)}` on a metric space.
#[derive(Debug, Clone)]
pub struct OperatorFrame<T: Real> {
    elements: Vec<CMatrix<T>>,
    weights: Vec<T>,
    metric: Arc<Metric<T>>,
    superop: CMatrix<T>,
    condition_number: T,
    conjugation_residual: T,
}

/// Row-major `vec`.
fn vec_of<T: Real>(m: &CMatrix<T>) -> Vec<Cx<T>> {
    m.as_slice().to_vec()
}

/// Superoperator of `X -> sum_i c_i <p_i, X> q_i` with the bilinear pairing
/// `<p, X> = sum_ab p_ab X_ab`, in row-major vec coordinates.
fn rank_one_sum<T: Real>(terms: impl Iterator<Item = (T, CMatrix<T>, CMatrix<T>)>, n: usize) -> CMatrix<T> {
    let mut w = CMatrix::zeros(n * n, n * n);
    for (c, p, q) in terms {
        let pv = vec_of(&p);
        let qv = vec_of(&q);
        for (r, qr) in qv.iter().enumerate() {
            if qr.is_zero() {
                continue;
            }
            let s = *qr * c;
            for (k, pk) in pv.iter().enumerate() {
                w[(r, k)] += s * pk;
            }
        }
    }
    w
}

impl<T: Real> OperatorFrame<T> {
    /// Validates the frame and builds its sampling superoperator.
    pub fn new(elements: Vec<CMatrix<T>>, weights: Vec<T>, metric: Arc<Metric<T>>, tol: T) -> Result<Self> {
        let n = metric.dim();
        if elements.is_empty() || elements.len() != weights.len() {
            return Err(dim_err(format!("{} frame elements with {} weights", elements.len(), weights.len())));
        }
        if weights.iter().any(|w| !(*w > T::zero())) {
            return Err(Error::InvalidInput("frame weights must be positive".into()));
        }
        let total = weights.iter().fold(T::zero(), |a, w| a + *w);
        if (total - T::one()).abs() > T::lit(1e-10).max(tol) {
            return Err(Error::InvalidInput(format!("frame weights sum to {total}, not 1")));
        }
        for e in &elements {
            e.expect_square(n, "frame element")?;
            let q = metric.quasi_hermiticity(e, T::lit(1e-8).max(tol))?;
            if !q.holds {
                return Err(Error::NotQuasiHermitian { residual: q.residual.as_f64() });
            }
        }
        let superop = build_superop(&elements, &weights, &metric)?;
        let sv = singular_values(&superop);
        let smin = *sv.last().expect("non-empty spectrum");
        let condition_number = if smin > T::zero() { sv[0] / smin } else { T::infinity() };
        let conjugation_residual = conjugation_law_residual(&elements, &weights, &metric, &superop)?;
        Ok(Self { elements, weights, metric, superop, condition_number, conjugation_residual })
    }

    pub fn elements(&self) -> &[CMatrix<T>] {
        &self.elements
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn metric(&self) -> &Arc<Metric<T>> {
        &self.metric
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn superoperator(&self) -> &CMatrix<T> {
        &self.superop
    }

    pub fn condition_number(&self) -> T {
        self.condition_number
    }

    /// Max-entry deviation between the metric-space sampling operator and
    /// the Euclidean sampling operator of the Hermitised frame conjugated by
    /// `eta`.
    pub fn conjugation_residual(&self) -> T {
        self.conjugation_residual
    }

    /// Max-entry deviation of the sampling operator from the identity.
    pub fn tightness_residual(&self) -> T {
        let n = self.dim();
        self.superop.max_abs_diff(&CMatrix::identity(n * n))
    }
}

fn build_superop<T: Real>(elements: &[CMatrix<T>], weights: &[T], metric: &Metric<T>) -> Result<CMatrix<T>> {
    let n = metric.dim();
    let scale = T::lit(n as f64);
    let mut terms = Vec::with_capacity(elements.len());
    for (e, w) in elements.iter().zip(weights) {
        // <e, X>_G = tr(e* X) = sum_ab (e*)_ba X_ab.
        terms.push((*w * scale, metric.g_adjoint(e)?.transpose(), e.clone()));
    }
    Ok(rank_one_sum(terms.into_iter(), n))
}

fn conjugation_law_residual<T: Real>(
    elements: &[CMatrix<T>],
    weights: &[T],
    metric: &Metric<T>,
    superop: &CMatrix<T>,
) -> Result<T> {
    let n = metric.dim();
    let scale = T::lit(n as f64);
    let mut terms = Vec::with_capacity(elements.len());
    for (e, w) in elements.iter().zip(weights) {
        let h = metric.hermitize(e)?;
        terms.push((*w * scale, h.adjoint().transpose(), h));
    }
    let euclid = rank_one_sum(terms.into_iter(), n);
    // vec(A X B) = (A (x) B^T) vec(X) in row-major coordinates.
    let conj_in = kron(metric.eta(), &metric.eta_inv().transpose());
    let conj_out = kron(metric.eta_inv(), &metric.eta().transpose());
    let transported = &(&conj_out * &euclid) * &conj_in;
    Ok(transported.max_abs_diff(superop))
}

/// Frame `{eta^-1 (sigma_mu1 (x) ... (x) sigma_mun) eta}` over all Pauli
/// strings with uniform weights; string `k` has base-4 digits `k` (most
/// significant first, 0 = identity).
pub fn pauli_frame<T: Real>(n_qubits: usize, metric: Arc<Metric<T>>) -> Result<OperatorFrame<T>> {
    let dim = 1usize << n_qubits;
    if metric.dim() != dim {
        return Err(dim_err(format!("{n_qubits} qubits need a {dim}x{dim} metric, got {}", metric.dim())));
    }
    let count = 1usize << (2 * n_qubits);
    let elements = (0..count)
        .map(|k| metric.dehermitize(&pauli_string(&pauli_digits(k, n_qubits))))
        .collect::<Result<Vec<_>>>()?;
    let weights = vec![T::one() / T::lit(count as f64); count];
    OperatorFrame::new(elements, weights, metric, T::lit(crate::DEFAULT_TOL))
}

pub fn sampling_superoperator<T: Real>(frame: &OperatorFrame<T>) -> &CMatrix<T> {
    frame.superoperator()
}

/// `<e_i, rho_bar>_G` for every frame element.
pub fn frame_expectations<T: Real>(frame: &OperatorFrame<T>, state: &MetricState<T>) -> Result<Vec<T>> {
    if **state.metric() != **frame.metric() {
        return Err(Error::InvalidState("state and frame live on different metrics".into()));
    }
    frame.elements.iter().map(|e| Ok(expectation(e, state)?.re)).collect()
}

/// Linear-inversion estimate with its nearest valid state.
#[derive(Debug, Clone)]
pub struct Reconstruction<T: Real> {
    /// `W^-1 (sum_i w_i dim e_i element_i)` before any correction.
    pub raw: CMatrix<T>,
    /// Raw estimate with negative Hermitised eigenvalues clipped and the
    /// trace renormalized.
    pub state: MetricState<T>,
    /// Whether clipping changed the estimate.
    pub projected: bool,
    /// Smallest eigenvalue of the Hermitised raw estimate.
    pub min_eigenvalue: T,
    pub condition_number: T,
}

/// Reconstructs `rho_bar` from frame expectations `e_i = <element_i, rho_bar>_G`.
pub fn reconstruct<T: Real>(expectations: &[T], frame: &OperatorFrame<T>, tol: T) -> Result<Reconstruction<T>> {
    if expectations.len() != frame.len() {
        return Err(dim_err(format!("{} expectations for a frame of {} elements", expectations.len(), frame.len())));
    }
    if !(frame.condition_number <= T::lit(MAX_CONDITION)) {
        return Err(Error::SingularFrame { condition: frame.condition_number.as_f64() });
    }
    let metric = frame.metric.clone();
    for (i, (&e, el)) in expectations.iter().zip(&frame.elements).enumerate() {
        let bound = metric.hermitize(el)?.norm2();
        if !e.is_finite() || e.abs() > bound * (T::one() + T::lit(1e-9)) + tol {
            return Err(Error::InconsistentData { index: i, value: e.as_f64(), bound: bound.as_f64() });
        }
    }
    let n = frame.dim();
    let scale = T::lit(n as f64);
    let mut sampled = CMatrix::zeros(n, n);
    for ((&e, el), &w) in expectations.iter().zip(&frame.elements).zip(&frame.weights) {
        sampled += &el.scale_real(w * scale * e);
    }
    let lu = Lu::new(&frame.superop)?;
    let raw_vec = lu.solve_vec(sampled.as_slice())?;
    let raw = CMatrix::new(n, n, raw_vec)?;
    let rho = metric.hermitize(&raw)?.hermitian_part();
    let (vals, vecs) = eigh(&rho);
    let min_eigenvalue = vals[0];
    let projected = min_eigenvalue < -tol;
    let fixed = if projected {
        let clipped: Vec<T> = vals.iter().map(|v| v.max(T::zero())).collect();
        let total = clipped.iter().fold(T::zero(), |a, v| a + *v);
        let d = CMatrix::diag_real(&clipped.iter().map(|v| *v / total).collect::<Vec<_>>());
        (&(&vecs * &d) * &vecs.adjoint()).hermitian_part()
    } else {
        let tr = rho.trace().re;
        rho.scale_real(T::one() / tr)
    };
    let state = MetricState::from_euclidean(&fixed, metric, T::lit(1e-8).max(tol))?;
    Ok(Reconstruction { raw, state, projected, min_eigenvalue, condition_number: frame.condition_number })
}

/// `||rho - sigma||_1 / 2` of the Hermitised states.
pub fn trace_distance<T: Real>(a: &MetricState<T>, b: &MetricState<T>) -> Result<T> {
    let ra = a.hermitized();
    let rb = b.hermitized();
    if ra.shape() != rb.shape() {
        return Err(dim_err("states differ in dimension"));
    }
    let (vals, _) = eigh(&(&ra - &rb));
    Ok(vals.iter().fold(T::zero(), |acc, v| acc + v.abs()) * T::lit(0.5))
}

/// Axis index (1 = x, 2 = y, 3 = z) and sign of a direction aligned with a
/// coordinate axis.
fn axis_of(n: &[f64; 3]) -> Option<(usize, f64)> {
    (0..3).find_map(|k| {
        let others = (0..3).filter(|&j| j != k).all(|j| n[j].abs() < 1e-9);
        (others && (n[k].abs() - 1.0).abs() < 1e-9).then(|| (k + 1, n[k].signum()))
    })
}

/// Pauli-string expectations `<sigma_mu1 (x) ... (x) sigma_mun>` estimated
/// from axis-aligned spin records, ordered as in [`pauli_frame`]. Each
/// string averages over every setting that measures its non-identity
/// parties along the required axes.
pub fn expectations_from_records<T: Real>(records: &[MeasurementRecord], n_qubits: usize) -> Result<Vec<T>> {
    let count = 1usize << (2 * n_qubits);
    let mut sums = vec![0.0f64; count];
    let mut shots = vec![0.0f64; count];
    for rec in records {
        if rec.party_dirs.len() != n_qubits || rec.outcomes.len() != n_qubits {
            return Err(dim_err(format!("record does not describe {n_qubits} parties")));
        }
        let axes: Option<Vec<(usize, f64)>> = rec.party_dirs.iter().map(axis_of).collect();
        let Some(axes) = axes else { continue };
        for k in 0..count {
            let digits = pauli_digits(k, n_qubits);
            if digits.iter().zip(&axes).any(|(&d, &(a, _))| d != 0 && d != a) {
                continue;
            }
            let value =
                digits.iter().zip(&axes).zip(&rec.outcomes).fold(
                    1.0,
                    |acc, ((&d, &(_, sign)), &m)| {
                        if d == 0 {
                            acc
                        } else {
                            acc * 2.0 * m * sign
                        }
                    },
                );
            sums[k] += value * rec.count as f64;
            shots[k] += rec.count as f64;
        }
    }
    sums.iter()
        .zip(&shots)
        .enumerate()
        .map(|(k, (&s, &c))| {
            if c == 0.0 {
                Err(Error::InvalidInput(format!(
                    "no axis-aligned data for Pauli string {:?}",
                    pauli_digits(k, n_qubits)
                )))
            } else {
                Ok(T::lit(s / c))
            }
        })
        .collect()
}
