use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::error::Error;
use crate::linalg::{expm, kron, pauli, spin_along, CMatrix};
use crate::metric::{Metric, MetricState};
use crate::rng;
use crate::scalar::Cx;

type M = CMatrix<f64>;

fn random_metric(n: usize, seed: u64) -> Arc<Metric<f64>> {
    let g = rng::positive_definite(n, 0.3, 3.0, &mut rng::stream(seed, 1));
    Arc::new(Metric::new(g, 1e-10).unwrap())
}

fn random_state(metric: Arc<Metric<f64>>, seed: u64) -> MetricState<f64> {
    let rho = rng::density(metric.dim(), &mut rng::stream(seed, 2));
    MetricState::from_euclidean(&rho, metric, 1e-10).unwrap()
}

/// Direct evaluation of `sum_i w_i dim tr(e_i* X) e_i`.
fn apply_frame(frame: &OperatorFrame<f64>, x: &M) -> M {
    let n = frame.dim() as f64;
    let mut out = M::zeros(x.rows(), x.cols());
    for (e, w) in frame.elements().iter().zip(frame.weights()) {
        let star = frame.metric().g_adjoint(e).unwrap();
        let c = (&star * x).trace() * (w * n);
        out += &e.map(|z| z * c);
    }
    out
}

#[test]
fn single_qubit_pauli_frame_is_tight() {
    let frame = pauli_frame::<f64>(1, Arc::new(Metric::identity(2))).unwrap();
    assert!(frame.tightness_residual() <= 1e-12);
    assert!((frame.condition_number() - 1.0).abs() < 1e-10);
    // Half-sum reconstruction with explicit Paulis.
    let rho = rng::density::<f64, _>(2, &mut rng::stream(3, 0));
    let half_sum = (0..4).fold(M::zeros(2, 2), |acc, k| {
        let s = pauli::<f64>(k);
        &acc + &s.map(|z| z * (&s * &rho).trace() * 0.5)
    });
    assert!(half_sum.max_abs_diff(&rho) < 1e-12);
}

#[test]
fn deformed_pauli_frames_are_tight() {
    for seed in 0..10 {
        for qubits in [1usize, 2] {
            let frame = pauli_frame(qubits, random_metric(1 << qubits, seed)).unwrap();
            assert!(frame.tightness_residual() <= 1e-10, "seed {seed}");
            assert!(frame.conjugation_residual() <= 1e-10);
        }
    }
}

#[test]
fn superoperator_matches_direct_evaluation() {
    let metric = random_metric(2, 7);
    let elements: Vec<M> = (0..4).map(|k| metric.dehermitize(&pauli(k)).unwrap()).collect();
    let frame = OperatorFrame::new(elements, vec![0.4, 0.1, 0.2, 0.3], metric, 1e-10).unwrap();
    assert!(frame.tightness_residual() > 0.1);
    assert!(frame.conjugation_residual() < 1e-10);
    let x = rng::ginibre::<f64, _>(2, 2, &mut rng::stream(8, 0));
    let direct = apply_frame(&frame, &x);
    let via = frame.superoperator().matvec(x.as_slice());
    assert!(M::new(2, 2, via).unwrap().max_abs_diff(&direct) < 1e-12);
}

#[test]
fn frame_validation() {
    let metric = Arc::new(Metric::identity(2));
    let els: Vec<M> = (0..4).map(pauli).collect();
    let bad_weights = OperatorFrame::new(els.clone(), vec![0.5; 4], metric.clone(), 1e-10);
    assert!(matches!(bad_weights, Err(Error::InvalidInput(_))));
    let short = OperatorFrame::new(els.clone(), vec![0.5; 2], metric.clone(), 1e-10);
    assert!(matches!(short, Err(Error::DimensionMismatch(_))));
    let mut skew = els;
    skew[1] = M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    let r = OperatorFrame::new(skew, vec![0.25; 4], metric.clone(), 1e-10);
    assert!(matches!(r, Err(Error::NotQuasiHermitian { .. })));
    assert!(pauli_frame(2, metric).is_err());
}

#[test]
fn incomplete_frame_is_singular() {
    let metric = Arc::new(Metric::identity(2));
    let els: Vec<M> = (0..3).map(pauli).collect();
    let frame = OperatorFrame::new(els, vec![1.0 / 3.0; 3], metric, 1e-10).unwrap();
    assert!(frame.condition_number() > 1e12);
    let r = reconstruct(&[1.0, 0.0, 0.0], &frame, 1e-10);
    assert!(matches!(r, Err(Error::SingularFrame { .. })));
}

#[test]
fn exact_reconstruction_on_random_metrics() {
    for seed in 0..10 {
        for qubits in [1usize, 2] {
            let metric = random_metric(1 << qubits, seed + 100);
            let state = random_state(metric.clone(), seed);
            let frame = pauli_frame(qubits, metric).unwrap();
            let e = frame_expectations(&frame, &state).unwrap();
            let rec = reconstruct(&e, &frame, 1e-10).unwrap();
            assert!(rec.raw.max_abs_diff(state.rho_bar()) < 1e-10);
            assert!(!rec.projected);
            assert!(trace_distance(&rec.state, &state).unwrap() < 1e-10);
        }
    }
}

#[test]
fn non_tight_frame_reconstructs_exactly() {
    let metric = random_metric(2, 9);
    let elements: Vec<M> = (0..4).map(|k| metric.dehermitize(&pauli(k)).unwrap()).collect();
    let frame = OperatorFrame::new(elements, vec![0.1, 0.3, 0.3, 0.3], metric.clone(), 1e-10).unwrap();
    let state = random_state(metric, 4);
    let e = frame_expectations(&frame, &state).unwrap();
    let rec = reconstruct(&e, &frame, 1e-10).unwrap();
    assert!(rec.raw.max_abs_diff(state.rho_bar()) < 1e-10);
}

#[test]
fn unphysical_data_is_projected() {
    let frame = pauli_frame::<f64>(1, Arc::new(Metric::identity(2))).unwrap();
    let rec = reconstruct::<f64>(&[1.0, 0.8, 0.8, 0.0], &frame, 1e-10).unwrap();
    assert!(rec.projected);
    assert!(rec.min_eigenvalue < 0.0);
    let rho = rec.state.hermitized();
    assert!((rho.trace().re - 1.0).abs() < 1e-12);
    assert!(crate::linalg::eigh(&rho).0[0] > -1e-12);
}

#[test]
fn out_of_range_expectation_is_inconsistent() {
    let frame = pauli_frame(1, Arc::new(Metric::identity(2))).unwrap();
    let r = reconstruct(&[1.0, 0.0, 0.0, 1.5], &frame, 1e-10);
    assert!(matches!(r, Err(Error::InconsistentData { index: 3, .. })));
    assert!(matches!(reconstruct(&[1.0], &frame, 1e-10), Err(Error::DimensionMismatch(_))));
}

#[test]
fn measurement_along_x_for_ground_state() {
    let state = MetricState::from_euclidean(&M::diag_real(&[1.0, 0.0]), Arc::new(Metric::identity(2)), 1e-10).unwrap();
    let cfg = SternGerlachConfig::new(FRAC_PI_2, 0.0, 2.0, 0.5).unwrap();
    let d = cfg.direction();
    assert!((d[0] - 1.0).abs() < 1e-15 && d[2].abs() < 1e-15);
    // gamma |B| t = pi / 2.
    let b = cfg.field();
    assert!((b[1] * 2.0 * 0.5 - FRAC_PI_2).abs() < 1e-15);
    let u1 = expm(&pauli::<f64>(2).map(|z| z * Cx::new(0.0, -FRAC_PI_4)));
    assert!(cfg.rotation().max_abs_diff(&u1) < 1e-14);
    let p = stern_gerlach_probabilities(&state, &cfg).unwrap();
    assert!((p.plus_half - 0.5).abs() < 1e-14 && (p.minus_half - 0.5).abs() < 1e-14);
}

#[test]
fn forward_conjugation_measures_the_opposite_outcome() {
    // <m| U rho U^dag |m> with U = exp(-i pi/4 sigma_y) measures -sigma_x.
    let rho = rng::density::<f64, _>(2, &mut rng::stream(12, 0));
    let state = MetricState::from_euclidean(&rho, Arc::new(Metric::identity(2)), 1e-10).unwrap();
    let cfg = SternGerlachConfig::new(FRAC_PI_2, 0.0, 1.0, 1.0).unwrap();
    let u = cfg.rotation();
    let forward = &(&u * &rho) * &u.adjoint();
    let p = stern_gerlach_probabilities(&state, &cfg).unwrap();
    assert!((forward[(0, 0)].re - p.minus_half).abs() < 1e-12);
    let sx = (&pauli::<f64>(1) * &rho).trace().re;
    assert!((p.mean() - 0.5 * sx).abs() < 1e-12);
}

#[test]
fn invalid_settings_are_rejected() {
    assert!(matches!(SternGerlachConfig::new(1.0, 0.0, 1.0, 0.0), Err(Error::InvalidInput(_))));
    assert!(matches!(SternGerlachConfig::new(1.0, 0.0, 0.0, 1.0), Err(Error::InvalidInput(_))));
    assert!(SternGerlachConfig::<f64>::along([1.0, 1.0, 0.0], 1.0, 1.0).is_err());
    let state = random_state(random_metric(4, 1), 1);
    let cfg = SternGerlachConfig::new(1.0, 0.0, 1.0, 1.0).unwrap();
    assert!(matches!(stern_gerlach_probabilities(&state, &cfg), Err(Error::DimensionMismatch(_))));
}

#[test]
fn rotation_identity_on_grid() {
    for i in 0..5 {
        for j in 0..4 {
            let theta = PI * i as f64 / 4.0;
            let phi = 2.0 * PI * j as f64 / 4.0 + 0.1;
            let cfg = SternGerlachConfig::new(theta, phi, 1.3, 0.7).unwrap();
            let u = cfg.rotation();
            let lhs = &(&u * &pauli(3)) * &u.adjoint();
            assert!(lhs.max_abs_diff(&spin_along(cfg.direction())) < 1e-12);
        }
    }
}

#[test]
fn simulated_records_are_complete_and_deterministic() {
    let metric = random_metric(4, 21);
    let state = random_state(metric, 21);
    let settings = pauli_settings::<f64>(2);
    assert_eq!(settings.len(), 9);
    let a = simulate_dataset(&state, &settings, 500, 5).unwrap();
    let b = simulate_dataset(&state, &settings, 500, 5).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 36);
    for chunk in a.chunks(4) {
        assert_eq!(chunk.iter().map(|r| r.count).sum::<u64>(), 500);
    }
    let c = simulate_dataset(&state, &settings, 500, 6).unwrap();
    assert_ne!(a, c);
    let json = serde_json::to_string(&a[0]).unwrap();
    assert!(json.contains("\"party_dirs\"") && json.contains("\"outcomes\""));
}

#[test]
fn sampled_reconstruction_is_close() {
    for seed in 0..3 {
        let metric = random_metric(4, 40 + seed);
        let state = random_state(metric.clone(), 40 + seed);
        let records = simulate_dataset(&state, &pauli_settings(2), 10_000, seed).unwrap();
        let e = expectations_from_records::<f64>(&records, 2).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-15);
        let rec = reconstruct(&e, &pauli_frame(2, metric).unwrap(), 1e-10).unwrap();
        assert!(trace_distance(&rec.state, &state).unwrap() <= 0.05);
    }
}

#[test]
fn tomographic_equivalence_by_conjugation() {
    let metric = random_metric(4, 77);
    let state = random_state(metric.clone(), 77);
    let euclid = MetricState::from_euclidean(&state.hermitized(), Arc::new(Metric::identity(4)), 1e-10).unwrap();
    let settings = pauli_settings(2);
    let da = simulate_dataset(&state, &settings, 2_000, 3).unwrap();
    let db = simulate_dataset(&euclid, &settings, 2_000, 3).unwrap();
    assert_eq!(da, db);
    let ea = expectations_from_records::<f64>(&da, 2).unwrap();
    let ra = reconstruct(&ea, &pauli_frame(2, metric.clone()).unwrap(), 1e-10).unwrap();
    let rb = reconstruct(&ea, &pauli_frame(2, Arc::new(Metric::identity(4))).unwrap(), 1e-10).unwrap();
    let transported = metric.dehermitize(&rb.raw).unwrap();
    assert!(transported.max_abs_diff(&ra.raw) < 1e-10);
}

#[test]
fn records_need_axis_data_for_every_string() {
    let rec = MeasurementRecord { party_dirs: vec![[0.0, 0.0, 1.0]], outcomes: vec![0.5], count: 3 };
    assert!(expectations_from_records::<f64>(std::slice::from_ref(&rec), 1).is_err());
    let flipped = MeasurementRecord { party_dirs: vec![[0.0, 0.0, -1.0]], ..rec.clone() };
    let x = MeasurementRecord { party_dirs: vec![[1.0, 0.0, 0.0]], ..rec.clone() };
    let y = MeasurementRecord { party_dirs: vec![[0.0, 1.0, 0.0]], ..rec.clone() };
    let e = expectations_from_records::<f64>(&[rec, flipped, x, y], 1).unwrap();
    assert_eq!(e, vec![1.0, 1.0, 1.0, 0.0]);
}

fn local_povm(metric: &Metric<f64>, seed: u64) -> Vec<M> {
    // Two-outcome POVM on Bob: Pi_0 = A, Pi_1 = I - A with 0 <= A <= I.
    let u = rng::unitary::<f64, _>(2, &mut rng::stream(seed, 9));
    let a = &(&u * &M::diag_real(&[0.2, 0.9])) * &u.adjoint();
    let b = &M::identity(2) - &a;
    let i2 = M::identity(2);
    [a, b].iter().map(|p| metric.dehermitize(&kron(&i2, p)).unwrap()).collect()
}

#[test]
fn no_signalling_for_deformed_local_povms() {
    for seed in 0..20 {
        let metric = random_metric(4, 200 + seed);
        let state = random_state(metric.clone(), 200 + seed);
        let r = verify_no_signalling(&state, (2, 2), &local_povm(&metric, seed), 1e-10).unwrap();
        assert!(r.holds);
        assert!(r.deviation <= 1e-10 && r.luders_deviation <= 1e-10);
    }
}

#[test]
fn nonlocal_and_incomplete_povms_are_rejected() {
    let metric = random_metric(4, 3);
    let state = random_state(metric.clone(), 3);
    let cnot = M::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 1.0, 0.0],
    ]);
    let proj = &M::identity(4) + &cnot;
    let half = proj.scale_real(0.5);
    let nonlocal = vec![metric.dehermitize(&half).unwrap(), metric.dehermitize(&(&M::identity(4) - &half)).unwrap()];
    let r = verify_no_signalling(&state, (2, 2), &nonlocal, 1e-10);
    assert!(matches!(r, Err(Error::NotLocalPovm { index: 0, .. })));
    let mut povm = local_povm(&metric, 1);
    povm.pop();
    assert!(matches!(verify_no_signalling(&state, (2, 2), &povm, 1e-10), Err(Error::IncompletePovm { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn born_rule_bridge(theta in 0.0..PI, phi in -PI..PI, seed in 0u64..1000) {
        let metric = random_metric(2, seed);
        let state = random_state(metric.clone(), seed);
        let cfg = SternGerlachConfig::new(theta, phi, 1.0, 1.0).unwrap();
        let p = stern_gerlach_probabilities(&state, &cfg).unwrap();
        prop_assert!((p.plus_half + p.minus_half - 1.0).abs() < 1e-12);
        let sigma_bar = metric.dehermitize(&spin_along(cfg.direction())).unwrap();
        let mean = crate::metric::expectation(&sigma_bar, &state).unwrap().re;
        prop_assert!((p.mean() - 0.5 * mean).abs() < 1e-10);
    }

    #[test]
    fn rotation_identity(theta in 0.0..PI, phi in -PI..PI, gamma in 0.1..5.0f64, t in 0.1..5.0f64) {
        let cfg = SternGerlachConfig::new(theta, phi, gamma, t).unwrap();
        let u = cfg.rotation();
        prop_assert!(crate::linalg::unitarity_residual(&u) < 1e-12);
        let lhs = &(&u * &pauli(3)) * &u.adjoint();
        prop_assert!(lhs.max_abs_diff(&spin_along(cfg.direction())) < 1e-12);
    }
}
