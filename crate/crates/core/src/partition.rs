//! Subsystem decompositions of metric Hilbert spaces.
//!
//! A metric choice `G` together with the Hermitisation `eta` fixes which
//! operators act on "the first" and "the second" subsystem. Two choices
//! `G`, `G'` connected by an intertwiner `T` split the system the same way
//! exactly when `V = eta' T^-1 eta^-1` is a product unitary `U_1 (x) U_2`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{dim_err, Error, Result};
use crate::linalg::{
    eig_general, eigh, fix_phase, hermitian_function, inverse, kron, partial_trace, reshuffle, svd, unitarity_residual,
    CMatrix, Factor, Svd,
};
use crate::metric::{check_metric_map, Metric, MetricState};
use crate::rng;
use crate::scalar::{cx, re, Cx, Real};

/// Second-to-first operator Schmidt coefficient ratio below which an
/// operator counts as a product.
pub const PRODUCT_THRESHOLD: f64 = 1e-8;

/// Tensor-product structure: `tps_map` carries the metric space onto the
/// Euclidean product `C^d1 (x) C^d2`.
#[derive(Debug, Clone)]
pub struct Bipartition<T: Real> {
    dims: (usize, usize),
    tps_map: CMatrix<T>,
    tps_inv: CMatrix<T>,
}

fn check_dims(dims: (usize, usize), n: usize) -> Result<()> {
    if dims.0 == 0 || dims.1 == 0 || dims.0 * dims.1 != n {
        return Err(dim_err(format!("factor dimensions {}x{} do not multiply to {n}", dims.0, dims.1)));
    }
    Ok(())
}

impl<T: Real> Bipartition<T> {
    pub fn new(dims: (usize, usize), tps_map: CMatrix<T>) -> Result<Self> {
        if !tps_map.is_square() {
            return Err(dim_err("TPS map must be square"));
        }
        check_dims(dims, tps_map.rows())?;
        let tps_inv = inverse(&tps_map)?;
        Ok(Self { dims, tps_map, tps_inv })
    }

    /// Structure induced by Hermitisation, `psi -> eta psi`.
    pub fn from_metric(metric: &Metric<T>, dims: (usize, usize)) -> Result<Self> {
        Self::new(dims, metric.eta().clone())
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn tps_map(&self) -> &CMatrix<T> {
        &self.tps_map
    }

    /// Image of `A (x) 1` in the metric space, an element of the first subalgebra.
    pub fn first_factor_image(&self, a: &CMatrix<T>) -> Result<CMatrix<T>> {
        a.expect_square(self.dims.0, "first-factor operator")?;
        let e = kron(a, &CMatrix::identity(self.dims.1));
        Ok(&(&self.tps_inv * &e) * &self.tps_map)
    }

    /// Image of `1 (x) B` in the metric space.
    pub fn second_factor_image(&self, b: &CMatrix<T>) -> Result<CMatrix<T>> {
        b.expect_square(self.dims.1, "second-factor operator")?;
        let e = kron(&CMatrix::identity(self.dims.0), b);
        Ok(&(&self.tps_inv * &e) * &self.tps_map)
    }
}

/// `M = sum_r c_r A_r (x) B_r` with Hilbert-Schmidt orthonormal factors.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition<T: Real> {
    pub coefficients: Vec<T>,
    pub left_ops: Vec<CMatrix<T>>,
    pub right_ops: Vec<CMatrix<T>>,
}

impl<T: Real> SchmidtDecomposition<T> {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn reconstruct(&self) -> CMatrix<T> {
        let n = self.left_ops[0].rows() * self.right_ops[0].rows();
        self.coefficients
            .iter()
            .zip(self.left_ops.iter().zip(&self.right_ops))
            .fold(CMatrix::zeros(n, n), |acc, (c, (a, b))| &acc + &kron(a, b).scale_real(*c))
    }
}

fn unvec<T: Real>(v: &[Cx<T>], d: usize, conj: bool) -> CMatrix<T> {
    CMatrix::from_fn(d, d, |i, j| if conj { v[i * d + j].conj() } else { v[i * d + j] })
}

/// Operator Schmidt decomposition from the SVD of the realigned matrix;
/// terms with coefficient at most `tol * c_1` are dropped (at least one is kept).
pub fn operator_schmidt<T: Real>(m: &CMatrix<T>, dims: (usize, usize), tol: T) -> Result<SchmidtDecomposition<T>> {
    let r = reshuffle(m, dims)?;
    let Svd { u, s, v } = svd(&r);
    let c1 = s[0];
    let keep = s.iter().take_while(|&&x| x > tol * c1).count().max(1);
    Ok(SchmidtDecomposition {
        coefficients: s[..keep].to_vec(),
        left_ops: (0..keep).map(|k| unvec(&u.col(k), dims.0, false)).collect(),
        right_ops: (0..keep).map(|k| unvec(&v.col(k), dims.1, true)).collect(),
    })
}

/// All Schmidt coefficients, including vanishing ones.
pub fn schmidt_coefficients<T: Real>(m: &CMatrix<T>, dims: (usize, usize)) -> Result<Vec<T>> {
    Ok(svd(&reshuffle(m, dims)?).s)
}

/// `sqrt(sum_{r >= 2} c_r^2) / ||M||_F`, zero exactly for product operators.
pub fn nonlocality<T: Real>(m: &CMatrix<T>, dims: (usize, usize)) -> Result<T> {
    let s = schmidt_coefficients(m, dims)?;
    let total = s.iter().fold(T::zero(), |acc, x| acc + *x * *x);
    if total == T::zero() {
        return Ok(T::zero());
    }
    let rest = s.iter().skip(1).fold(T::zero(), |acc, x| acc + *x * *x);
    Ok((rest / total).sqrt())
}

/// Factors of a product unitary.
#[derive(Debug, Clone, Serialize)]
pub struct LocalFactors<T: Real> {
    pub first: CMatrix<T>,
    pub second: CMatrix<T>,
    /// `||U - U_1 (x) U_2||_F`
    pub residual: T,
}

/// Splits `u = U_1 (x) U_2` when its operator Schmidt rank is one (second
/// coefficient at most `tol` times the first). The global phase is carried
/// by `U_1`; `U_2` has its dominant entry real and positive.
pub fn is_local_unitary<T: Real>(u: &CMatrix<T>, dims: (usize, usize), tol: T) -> Result<Option<LocalFactors<T>>> {
    if !u.is_square() {
        return Err(dim_err("unitary must be square"));
    }
    check_dims(dims, u.rows())?;
    let res = unitarity_residual(u);
    if res > T::lit(1e-8).max(tol) * T::lit(u.rows() as f64) {
        return Err(Error::NotUnitary { residual: res.as_f64() });
    }
    let s = schmidt_coefficients(u, dims)?;
    if s.len() > 1 && s[1] > tol * s[0] {
        return Ok(None);
    }
    let dec = operator_schmidt(u, dims, T::one())?;
    let c1 = dec.coefficients[0];
    let sqrt_d2 = T::lit(dims.1 as f64).sqrt();
    let mut second = dec.right_ops[0].scale_real(sqrt_d2);
    let mut flat = second.as_slice().to_vec();
    let ph = fix_phase(&mut flat);
    second = CMatrix::new(dims.1, dims.1, flat)?;
    let first = dec.left_ops[0].scale(re(c1 / sqrt_d2) / ph);
    let residual = (&kron(&first, &second) - u).frobenius_norm();
    Ok(Some(LocalFactors { first, second, residual }))
}

/// Verdict on whether two metrics induce the same bipartition.
#[derive(Debug, Clone, Serialize)]
pub struct Equivalence<T: Real> {
    pub equivalent: bool,
    pub witness: Option<LocalFactors<T>>,
    /// `V = eta' T^-1 eta^-1`
    pub v: CMatrix<T>,
    pub v_unitarity_residual: T,
    pub schmidt_coefficients: Vec<T>,
    pub map_residual: T,
}

/// Decides whether the intertwiner `t` from `g_prime` to `g` keeps the
/// bipartition, i.e. whether `eta' T^-1 = (U_1 (x) U_2) eta`.
pub fn same_bipartition<T: Real>(
    g: &Metric<T>,
    g_prime: &Metric<T>,
    t: &CMatrix<T>,
    dims: (usize, usize),
    tol: T,
) -> Result<Equivalence<T>> {
    check_dims(dims, g.dim())?;
    let cert = check_metric_map(t, g_prime, g, tol)?;
    if !cert.unitary {
        return Err(Error::NotIntertwiner { residual: cert.residual.as_f64() });
    }
    let v = &(g_prime.eta() * &inverse(t)?) * g.eta_inv();
    let v_res = unitarity_residual(&v);
    let coeffs = schmidt_coefficients(&v, dims)?;
    let unitary = v_res <= T::lit(1e-8).max(tol) * T::lit(v.rows() as f64);
    let witness = if unitary { is_local_unitary(&v, dims, T::lit(PRODUCT_THRESHOLD).max(tol))? } else { None };
    Ok(Equivalence {
        equivalent: witness.is_some(),
        witness,
        v,
        v_unitarity_residual: v_res,
        schmidt_coefficients: coeffs,
        map_residual: cert.residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
    Undetermined,
}

/// Outcome of the search for a local intertwiner in the commutant of `H`.
#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityReport<T: Real> {
    pub verdict: Verdict,
    pub witness: Option<LocalFactors<T>>,
    /// Best intertwiner found (commutes with `H`, maps `G'` to `G`).
    pub intertwiner: CMatrix<T>,
    pub best_nonlocality: T,
    pub best_restart: usize,
    pub restarts: usize,
    pub evaluations: usize,
    /// Best nonlocality reached by each restart, in restart order.
    pub restart_best: Vec<T>,
}

/// Commutant parametrization `T(W) = R blockdiag(L_k^-1/2 W_k L'_k^1/2) R^-1`.
struct Commutant<T: Real> {
    r: CMatrix<T>,
    r_inv: CMatrix<T>,
    blocks: Vec<(usize, usize)>,
    lam_inv_sqrt: Vec<CMatrix<T>>,
    lamp_sqrt: Vec<CMatrix<T>>,
}

fn sub_block<T: Real>(m: &CMatrix<T>, start: usize, len: usize) -> CMatrix<T> {
    CMatrix::from_fn(len, len, |i, j| m[(start + i, start + j)])
}

impl<T: Real> Commutant<T> {
    fn new(h: &CMatrix<T>, g: &Metric<T>, gp: &Metric<T>, tol: T) -> Result<Self> {
        let pairs = eig_general(h, tol)?;
        let n = h.rows();
        let scale = h.frobenius_norm().max(T::min_positive_value());
        let mut blocks = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && (pairs[end].value - pairs[start].value).norm() <= T::lit(1e-8) * scale {
                end += 1;
            }
            blocks.push((start, end - start));
            start = end;
        }
        let r = CMatrix::from_columns(&pairs.iter().map(|p| p.right.clone()).collect::<Vec<_>>());
        let r_inv = inverse(&r)?;
        let lam = &(&r.adjoint() * g.g()) * &r;
        let lamp = &(&r.adjoint() * gp.g()) * &r;
        let mut lam_inv_sqrt = Vec::new();
        let mut lamp_sqrt = Vec::new();
        for &(s, len) in &blocks {
            let lk = sub_block(&lam, s, len).hermitian_part();
            let lpk = sub_block(&lamp, s, len).hermitian_part();
            lam_inv_sqrt.push(hermitian_function(&lk, |x| re(T::one() / x.max(T::min_positive_value()).sqrt())));
            lamp_sqrt.push(hermitian_function(&lpk, |x| re(x.max(T::zero()).sqrt())));
        }
        Ok(Self { r, r_inv, blocks, lam_inv_sqrt, lamp_sqrt })
    }

    /// Real parameter count: `len^2` per block (Hermitian generator).
    fn n_params(&self) -> usize {
        self.blocks.iter().map(|&(_, len)| len * len).sum()
    }

    fn build(&self, params: &[T]) -> CMatrix<T> {
        let n = self.r.rows();
        let mut c = CMatrix::zeros(n, n);
        let mut offset = 0;
        for (k, &(s, len)) in self.blocks.iter().enumerate() {
            let gen = hermitian_generator(&params[offset..offset + len * len], len);
            offset += len * len;
            let w = hermitian_function(&gen, |x| cx(x.cos(), x.sin()));
            let ck = &(&self.lam_inv_sqrt[k] * &w) * &self.lamp_sqrt[k];
            for i in 0..len {
                for j in 0..len {
                    c[(s + i, s + j)] = ck[(i, j)];
                }
            }
        }
        &(&self.r * &c) * &self.r_inv
    }
}

/// Hermitian matrix from `len^2` reals: diagonal first, then real and
/// imaginary parts of the strict upper triangle.
fn hermitian_generator<T: Real>(p: &[T], len: usize) -> CMatrix<T> {
    let mut h = CMatrix::zeros(len, len);
    let mut idx = len;
    for i in 0..len {
        h[(i, i)] = re(p[i]);
        for j in i + 1..len {
            let z = cx(p[idx], p[idx + 1]);
            idx += 2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

struct SearchOutcome<T: Real> {
    best: T,
    params: Vec<T>,
    evaluations: usize,
}

fn objective<T: Real>(c: &Commutant<T>, params: &[T], g: &Metric<T>, gp: &Metric<T>, dims: (usize, usize)) -> T {
    let t = c.build(params);
    match inverse(&t) {
        Ok(t_inv) => {
            let v = &(gp.eta() * &t_inv) * g.eta_inv();
            nonlocality(&v, dims).unwrap_or_else(|_| T::infinity())
        }
        Err(_) => T::infinity(),
    }
}

/// Coordinate pattern search with step halving.
fn refine<T: Real>(
    c: &Commutant<T>,
    mut params: Vec<T>,
    g: &Metric<T>,
    gp: &Metric<T>,
    dims: (usize, usize),
    max_evals: usize,
) -> SearchOutcome<T> {
    let mut best = objective(c, &params, g, gp, dims);
    let mut evaluations = 1;
    let mut step = T::lit(0.5);
    let floor = T::lit(1e-13);
    while step > floor && evaluations < max_evals && best > T::lit(1e-14) {
        let mut improved = false;
        for k in 0..params.len() {
            for sign in [T::one(), -T::one()] {
                let mut trial = params.clone();
                trial[k] += sign * step;
                let val = objective(c, &trial, g, gp, dims);
                evaluations += 1;
                if val < best {
                    best = val;
                    params = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= T::lit(0.5);
        }
    }
    SearchOutcome { best, params, evaluations }
}

/// Searches the commutant of `H` for an intertwiner from `G'` to `G` whose
/// `V` is a product unitary. `search_budget` counts random restarts beyond
/// the identity starting point; restarts run in parallel on independent
/// streams of `seed`, so the result is deterministic.
pub fn hamiltonian_compatible_class<T: Real>(
    h: &CMatrix<T>,
    g: &Metric<T>,
    g_prime: &Metric<T>,
    dims: (usize, usize),
    tol: T,
    search_budget: usize,
    seed: u64,
) -> Result<CompatibilityReport<T>> {
    h.expect_square(g.dim(), "Hamiltonian")?;
    check_dims(dims, g.dim())?;
    if g_prime.dim() != g.dim() {
        return Err(dim_err("metrics differ in dimension"));
    }
    let qtol = T::lit(1e-8).max(tol);
    for (which, m) in [("first", g), ("second", g_prime)] {
        let q = m.quasi_hermiticity(h, qtol)?;
        if !q.holds {
            return Err(Error::IncompatibleMetric { which, residual: q.residual.as_f64() });
        }
    }
    let comm = Commutant::new(h, g, g_prime, tol)?;
    let np = comm.n_params();
    let starts: Vec<Vec<T>> = (0..=search_budget)
        .map(|k| {
            if k == 0 {
                vec![T::zero(); np]
            } else {
                let mut r = rng::stream(seed, k as u64);
                (0..np).map(|_| T::lit(r.gen_range(-std::f64::consts::PI..std::f64::consts::PI))).collect()
            }
        })
        .collect();
    let outcomes: Vec<SearchOutcome<T>> =
        starts.into_par_iter().map(|p| refine(&comm, p, g, g_prime, dims, 4000)).collect();
    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let restart_best: Vec<T> = outcomes.iter().map(|o| o.best).collect();
    let best_restart = restart_best.iter().enumerate().fold(0, |bi, (i, v)| if *v < restart_best[bi] { i } else { bi });
    let t = comm.build(&outcomes[best_restart].params);
    let eq = same_bipartition(g, g_prime, &t, dims, qtol)?;
    let verdict = if eq.equivalent { Verdict::Equivalent } else { Verdict::Undetermined };
    Ok(CompatibilityReport {
        verdict,
        witness: eq.witness,
        intertwiner: t,
        best_nonlocality: restart_best[best_restart],
        best_restart,
        restarts: restart_best.len(),
        evaluations,
        restart_best,
    })
}

/// `tr_other(eta rho_bar eta^-1)`, Hermitian and unit trace.
pub fn reduced_state<T: Real>(state: &MetricState<T>, dims: (usize, usize), keep: Factor) -> Result<CMatrix<T>> {
    check_dims(dims, state.dim())?;
    Ok(partial_trace(&state.hermitized(), dims, keep)?.hermitian_part())
}

/// Von Neumann entropy in bits of a reduced density matrix, with
/// eigenvalues below `1e-14` clamped to zero.
pub fn von_neumann_entropy<T: Real>(rho: &CMatrix<T>) -> T {
    let (vals, _) = eigh(rho);
    vals.iter().filter(|&&p| p > T::lit(1e-14)).fold(T::zero(), |acc, &p| acc - p * p.log2())
}

/// Entanglement entropy of a pure global state across the bipartition.
pub fn entanglement_entropy<T: Real>(state: &MetricState<T>, dims: (usize, usize)) -> Result<T> {
    check_dims(dims, state.dim())?;
    let purity = state.purity();
    if purity < T::one() - T::lit(1e-8) {
        return Err(Error::MixedGlobalState { purity: purity.as_f64() });
    }
    Ok(von_neumann_entropy(&reduced_state(state, dims, Factor::First)?))
}

#[cfg(test)]
mod tests;
