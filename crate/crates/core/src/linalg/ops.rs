use num_traits::{One, Zero};

use super::jacobi::{eigh, hermitian_function};
use super::matrix::CMatrix;
use crate::error::{dim_err, Error, Result};
use crate::scalar::{cx, re, Cx, Real};

/// Which tensor factor of a bipartite space to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    First,
    Second,
}

/// Kronecker product `A (x) B`.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

fn check_bipartite<T: Real>(m: &CMatrix<T>, (d1, d2): (usize, usize)) -> Result<()> {
    if d1 == 0 || d2 == 0 {
        return Err(dim_err("factor dimensions must be positive"));
    }
    if !m.is_square() || m.rows() != d1 * d2 {
        return Err(dim_err(format!(
            "operator of shape {}x{} does not live on a {d1}x{d2} bipartition",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Partial trace over the factor that is not kept.
pub fn partial_trace<T: Real>(m: &CMatrix<T>, dims: (usize, usize), keep: Factor) -> Result<CMatrix<T>> {
    check_bipartite(m, dims)?;
    let (d1, d2) = dims;
    Ok(match keep {
        Factor::First => {
            CMatrix::from_fn(d1, d1, |i, k| (0..d2).fold(Cx::zero(), |acc, j| acc + m[(i * d2 + j, k * d2 + j)]))
        }
        Factor::Second => {
            CMatrix::from_fn(d2, d2, |j, l| (0..d1).fold(Cx::zero(), |acc, i| acc + m[(i * d2 + j, i * d2 + l)]))
        }
    })
}

/// Realignment `R[(i,k),(j,l)] = M[(i,j),(k,l)]`, a `d1^2 x d2^2` matrix
/// whose rank is the operator Schmidt rank of `M`.
pub fn reshuffle<T: Real>(m: &CMatrix<T>, dims: (usize, usize)) -> Result<CMatrix<T>> {
    check_bipartite(m, dims)?;
    let (d1, d2) = dims;
    Ok(CMatrix::from_fn(d1 * d1, d2 * d2, |r, c| {
        let (i, k) = (r / d1, r % d1);
        let (j, l) = (c / d2, c % d2);
        m[(i * d2 + j, k * d2 + l)]
    }))
}

/// Principal square root of a Hermitian positive-definite matrix.
///
/// Hermiticity and positivity are judged relative to the operator 2-norm of
/// `g`: the Hermitian residual must not exceed `tol` and every eigenvalue
/// must exceed `tol * ||g||`.
pub fn sqrt_pd<T: Real>(g: &CMatrix<T>, tol: T) -> Result<CMatrix<T>> {
    if !g.is_square() {
        return Err(dim_err("metric must be square"));
    }
    if !g.is_finite() {
        return Err(Error::NonFinite);
    }
    let herm = g.hermiticity_residual();
    if herm > tol {
        return Err(Error::NotHermitian { residual: herm.as_f64() });
    }
    let (vals, _) = eigh(g);
    let scale = vals.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let min = vals[0];
    if !(min > tol * scale) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min.as_f64() });
    }
    Ok(hermitian_function(g, |x| re(x.sqrt())).hermitian_part())
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.rows();
    let norm1 = (0..n).map(|j| (0..n).fold(T::zero(), |acc, i| acc + a[(i, j)].norm())).fold(T::zero(), T::max);
    let mut squarings = 0i32;
    let mut scale = T::one();
    let half = T::lit(0.5);
    while norm1 * scale > half {
        scale *= half;
        squarings += 1;
    }
    let x = a.scale_real(scale);
    let mut term = CMatrix::identity(n);
    let mut sum = CMatrix::identity(n);
    for k in 1..=20 {
        term = (&term * &x).scale_real(T::one() / T::lit(k as f64));
        sum += &term;
        if term.max_abs() <= T::epsilon() * T::lit(1e-2) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(-i H t)` for Hermitian `H` via its spectral decomposition.
pub fn unitary_propagator<T: Real>(h: &CMatrix<T>, t: T) -> CMatrix<T> {
    hermitian_function(h, |e| {
        let phi = -e * t;
        cx(phi.cos(), phi.sin())
    })
}

/// Pauli matrix by index: 0 = identity, 1 = x, 2 = y, 3 = z.
pub fn pauli<T: Real>(index: usize) -> CMatrix<T> {
    let o = Cx::<T>::zero();
    let l = Cx::<T>::one();
    let i = Cx::<T>::i();
    match index {
        0 => CMatrix::from_rows(&[vec![l, o], vec![o, l]]),
        1 => CMatrix::from_rows(&[vec![o, l], vec![l, o]]),
        2 => CMatrix::from_rows(&[vec![o, -i], vec![i, o]]),
        3 => CMatrix::from_rows(&[vec![l, o], vec![o, -l]]),
        _ => panic!("Pauli index must be 0..=3"),
    }
}

/// Pauli string `sigma_{i_1} (x) ... (x) sigma_{i_n}`, indices most significant first.
pub fn pauli_string<T: Real>(indices: &[usize]) -> CMatrix<T> {
    indices.iter().fold(CMatrix::identity(1), |acc, &k| kron(&acc, &pauli(k)))
}

/// Base-4 digits of `index` over `n` positions, most significant first.
pub fn pauli_digits(mut index: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for slot in digits.iter_mut().rev() {
        *slot = index % 4;
        index /= 4;
    }
    digits
}

/// `sigma . n` for a real 3-vector.
pub fn spin_along<T: Real>(n: [T; 3]) -> CMatrix<T> {
    &(&pauli::<T>(1).scale_real(n[0]) + &pauli::<T>(2).scale_real(n[1])) + &pauli::<T>(3).scale_real(n[2])
}

/// Relative commutator-style residual `||a - b||_F / (||a||_F + ||b||_F)`.
pub fn relative_residual<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    let denom = (a.frobenius_norm() + b.frobenius_norm()).max(T::min_positive_value());
    (a - b).frobenius_norm() / denom
}

/// `||U^dagger U - I||_F`
pub fn unitarity_residual<T: Real>(u: &CMatrix<T>) -> T {
    if !u.is_square() {
        return T::infinity();
    }
    (&(&u.adjoint() * u) - &CMatrix::identity(u.rows())).frobenius_norm()
}
