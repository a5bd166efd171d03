use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::linalg::{pauli, vnorm};
use crate::rng;

type M = CMatrix<f64>;

fn m2() -> Arc<MatrixAlgebra<f64>> {
    Arc::new(MatrixAlgebra::full(2))
}

fn pure(n: usize, seed: u64) -> M {
    let v = rng::state_vector::<f64, _>(n, &mut rng::stream(seed, 0));
    M::outer(&v, &v)
}

/// Rank of a set of matrices, computed from the singular values of the
/// matrix whose columns are their flattenings.
fn span_rank(ms: &[M]) -> usize {
    let cols: Vec<Vec<Cx<f64>>> = ms.iter().map(|m| m.as_slice().to_vec()).collect();
    let s = crate::linalg::singular_values(&M::from_columns(&cols));
    s.iter().filter(|&&x| x > 1e-10 * s[0]).count()
}

#[test]
fn closure_of_sigma_z_is_diagonal_algebra() {
    let a = close_algebra(&[pauli::<f64>(3)], 1e-10).unwrap();
    assert_eq!(a.dim(), 2);
    assert!(a.coordinates(&M::diag_real(&[0.3, -2.0]), 1e-10).is_ok());
    assert!(a.coordinates(&pauli(1), 1e-10).is_err());
}

#[test]
fn closure_of_x_and_z_is_full_m2() {
    let a = close_algebra(&[pauli::<f64>(1), pauli(3)], 1e-10).unwrap();
    assert_eq!(a.dim(), 4);
    let mut all = a.basis().to_vec();
    all.push(pauli(2));
    assert_eq!(span_rank(&all), 4);
    assert!(a.closure_residual() < 1e-12);
}

#[test]
fn closure_of_first_factor_embeds_m2_in_m4() {
    let i2 = M::identity(2);
    let gens = [kron(&pauli(1), &i2), kron(&pauli(3), &i2)];
    let a = close_algebra(&gens, 1e-10).unwrap();
    assert_eq!(a.dim(), 4);
    let mut all = a.basis().to_vec();
    all.extend((0..4).map(|k| kron(&pauli(k), &i2)));
    assert_eq!(span_rank(&all), 4);
    assert!(a.coordinates(&kron(&i2, &pauli(1)), 1e-10).is_err());
}

#[test]
fn closure_rejects_mixed_dimensions() {
    let r = close_algebra(&[pauli::<f64>(1), M::identity(3)], 1e-10);
    assert!(matches!(r, Err(Error::DimensionMismatch(_))));
}

#[test]
fn pure_state_on_m2_has_dimension_two() {
    let rho = M::diag_real(&[1.0, 0.0]);
    let omega = StateFunctional::from_density(m2(), &rho, 1e-10).unwrap();
    // Gram oracle over the Pauli basis: Gamma_ij = tr(rho s_i s_j).
    let paulis: Vec<M> = (0..4).map(pauli).collect();
    let g = M::from_fn(4, 4, |i, j| (&(&rho * &paulis[i]) * &paulis[j]).trace());
    let s = crate::linalg::singular_values(&g);
    assert_eq!(s.iter().filter(|&&x| x > 1e-10).count(), 2);
    let r = gns_construct(&omega, 1e-10).unwrap();
    assert_eq!(r.hilbert_dim(), 2);
    assert!(r.reconstruction_residual() < 1e-12);
    let (inside, _) = r.density_in_span(1e-10);
    assert!(inside);
}

#[test]
fn maximally_mixed_state_is_faithful() {
    let omega = StateFunctional::from_density(m2(), &M::identity(2).scale_real(0.5), 1e-10).unwrap();
    let r = gns_construct(&omega, 1e-10).unwrap();
    assert_eq!(r.hilbert_dim(), 4);
    assert_eq!(r.cyclic_rank(1e-10), 4);
    // A purification of a mixed state is not an element of pi(M_2).
    assert!(!r.density_in_span(1e-10).0);
}

#[test]
fn one_point_support_on_diagonal_algebra() {
    let a = Arc::new(close_algebra(&[pauli::<f64>(3)], 1e-10).unwrap());
    let omega = StateFunctional::from_density(a, &M::diag_real(&[1.0, 0.0]), 1e-10).unwrap();
    let r = gns_construct(&omega, 1e-10).unwrap();
    assert_eq!(r.hilbert_dim(), 1);
    let v = r.vector_state(&M::diag_real(&[0.7, 5.0])).unwrap();
    assert!((v - Cx::new(0.7, 0.0)).norm() < 1e-12);
}

#[test]
fn explicit_values_validation() {
    let a = Arc::new(close_algebra(&[pauli::<f64>(3)], 1e-10).unwrap());
    // Basis: I/sqrt2 and sigma_z/sqrt2. omega(I) = 2 is not normalized.
    let s2 = std::f64::consts::SQRT_2;
    let bad = StateFunctional::new(a.clone(), vec![Cx::new(s2, 0.0), Cx::new(0.0, 0.0)], 1e-10);
    assert!(matches!(bad, Err(Error::NotNormalized { .. })));
    // omega(sigma_z) = 3 violates positivity.
    let neg = StateFunctional::new(a.clone(), vec![Cx::new(1.0 / s2, 0.0), Cx::new(3.0 / s2, 0.0)], 1e-10);
    assert!(matches!(neg, Err(Error::NotPositive { .. })));
    let ok = StateFunctional::new(a, vec![Cx::new(1.0 / s2, 0.0), Cx::new(0.2 / s2, 0.0)], 1e-10).unwrap();
    assert!((ok.evaluate(&pauli(3)).unwrap() - Cx::new(0.2, 0.0)).norm() < 1e-12);
}

#[test]
fn products_of_one_dimensional_representations() {
    let a = Arc::new(close_algebra(&[pauli::<f64>(3)], 1e-10).unwrap());
    let omega = StateFunctional::from_density(a, &M::diag_real(&[0.0, 1.0]), 1e-10).unwrap();
    let r = gns_construct(&omega, 1e-10).unwrap();
    let p = product_representation(&r, &r);
    assert_eq!(p.hilbert_dim(), 1);
    assert!(p.reconstruction_residual() < 1e-12);
}

#[test]
fn product_of_faithful_m2_representations() {
    let w1 = StateFunctional::from_density(m2(), &rng::density(2, &mut rng::stream(1, 0)), 1e-10).unwrap();
    let w2 = StateFunctional::from_density(m2(), &rng::density(2, &mut rng::stream(2, 0)), 1e-10).unwrap();
    let r1 = gns_construct(&w1, 1e-10).unwrap();
    let r2 = gns_construct(&w2, 1e-10).unwrap();
    let p = product_representation(&r1, &r2);
    assert_eq!(p.hilbert_dim(), 16);
    for i in 0..4 {
        for j in 0..4 {
            let a = pauli::<f64>(i);
            let b = pauli::<f64>(j);
            let lhs = p.vector_state(&kron(&a, &b)).unwrap();
            let rhs = w1.evaluate(&a).unwrap() * w2.evaluate(&b).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }
    assert!(p.homomorphism_residual() < 1e-10);
}

#[test]
fn product_of_pure_representations() {
    let w1 = StateFunctional::from_density(m2(), &pure(2, 3), 1e-10).unwrap();
    let w2 = StateFunctional::from_density(m2(), &pure(2, 4), 1e-10).unwrap();
    let r1 = gns_construct(&w1, 1e-10).unwrap();
    let r2 = gns_construct(&w2, 1e-10).unwrap();
    let p = product_representation(&r1, &r2);
    assert_eq!(p.hilbert_dim(), 4);
    let zz = kron(&pauli::<f64>(3), &pauli(3));
    let lhs = p.vector_state(&zz).unwrap();
    let rhs = w1.evaluate(&pauli(3)).unwrap() * w2.evaluate(&pauli(3)).unwrap();
    assert!((lhs - rhs).norm() < 1e-12);
    assert!((vnorm(p.cyclic_vector()) - 1.0).abs() < 1e-12);
}

#[test]
fn four_by_four_dimension_law() {
    let a = Arc::new(MatrixAlgebra::full(4));
    let wp = StateFunctional::from_density(a.clone(), &pure(4, 5), 1e-10).unwrap();
    assert_eq!(gns_construct(&wp, 1e-10).unwrap().hilbert_dim(), 4);
    let wm = StateFunctional::from_density(a, &rng::density(4, &mut rng::stream(6, 0)), 1e-10).unwrap();
    let r = gns_construct(&wm, 1e-10).unwrap();
    assert_eq!(r.hilbert_dim(), 16);
    let s = r.summary(1e-10);
    assert!(s.reconstruction_residual < 1e-10 && s.homomorphism_residual < 1e-10 && s.star_residual < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn representation_is_a_star_homomorphism(seed in 0u64..10_000, mixed in any::<bool>()) {
        let rho = if mixed { rng::density(2, &mut rng::stream(seed, 0)) } else { pure(2, seed) };
        let omega = StateFunctional::from_density(m2(), &rho, 1e-10).unwrap();
        let r = gns_construct(&omega, 1e-10).unwrap();
        prop_assert_eq!(r.hilbert_dim(), if mixed { 4 } else { 2 });
        prop_assert!(r.reconstruction_residual() < 1e-10);
        prop_assert!(r.homomorphism_residual() < 1e-10);
        prop_assert!(r.star_residual() < 1e-10);
        prop_assert_eq!(r.cyclic_rank(1e-10), r.hilbert_dim());
    }
}
