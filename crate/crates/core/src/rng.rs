//! Seeded random streams and random instance generators.
//!
//! Every stochastic routine draws from a [`ChaCha8Rng`] addressed by a seed
//! and a stream index, so parallel workers never share a generator and the
//! result does not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{CMatrix, CVector};
use crate::scalar::{Cx, Real};

pub type StreamRng = ChaCha8Rng;

/// Independent generator for `(seed, stream)`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stream index for a two-level address such as (setting, replica).
pub fn substream(outer: u64, inner: u64) -> u64 {
    outer.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17) ^ inner
}

/// Standard normal deviate by Box-Muller.
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Cx<T> {
    Cx::new(T::lit(normal(rng)), T::lit(normal(rng)))
}

/// Matrix with i.i.d. complex Gaussian entries.
pub fn ginibre<T: Real, R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> CMatrix<T> {
    CMatrix::from_fn(n, m, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary from Gram-Schmidt on a Ginibre matrix.
pub fn unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix<T> {
    let g = ginibre::<T, _>(n, n, rng);
    let mut cols: Vec<CVector<T>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.col(j);
        for _ in 0..2 {
            for q in &cols {
                let p = crate::linalg::vdot(q, &v);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= p * y;
                }
            }
        }
        let nv = crate::linalg::vnorm(&v);
        v.iter_mut().for_each(|z| *z /= nv);
        cols.push(v);
    }
    CMatrix::from_columns(&cols)
}

/// Random Hermitian positive-definite matrix with eigenvalues in `[lo, hi]`.
pub fn positive_definite<T: Real, R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> CMatrix<T> {
    let u = unitary::<T, _>(n, rng);
    let d: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(lo..=hi))).collect();
    (&(&u * &CMatrix::diag_real(&d)) * &u.adjoint()).hermitian_part()
}

/// Random normalized pure state.
pub fn state_vector<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector<T> {
    let v: CVector<T> = (0..n).map(|_| complex_normal(rng)).collect();
    let nv = crate::linalg::vnorm(&v);
    v.into_iter().map(|z| z / nv).collect()
}

/// Random full-rank density matrix (Hilbert-Schmidt measure).
pub fn density<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix<T> {
    let g = ginibre::<T, _>(n, n, rng);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    w.scale_real(T::one() / tr).hermitian_part()
}

/// Random diagonalizable matrix `S diag(values) S^-1` with a well-conditioned
/// similarity `S` and the given real spectrum.
pub fn with_real_spectrum<T: Real, R: Rng + ?Sized>(values: &[T], rng: &mut R) -> CMatrix<T> {
    let n = values.len();
    let s = loop {
        let candidate = &CMatrix::identity(n) + &ginibre::<T, _>(n, n, rng).scale_real(T::lit(0.3));
        if let Ok(inv) = crate::linalg::inverse(&candidate) {
            if inv.frobenius_norm() * candidate.frobenius_norm() < T::lit(50.0 * n as f64) {
                break (candidate, inv);
            }
        }
    };
    &(&s.0 * &CMatrix::diag_real(values)) * &s.1
}

/// Spectrum of `n` well-separated reals in `[-span, span]`.
pub fn separated_spectrum<T: Real, R: Rng + ?Sized>(n: usize, span: f64, rng: &mut R) -> Vec<T> {
    let gap = 2.0 * span / n as f64;
    (0..n).map(|k| T::lit(-span + gap * (k as f64 + 0.25 + 0.5 * rng.gen::<f64>()))).collect()
}
