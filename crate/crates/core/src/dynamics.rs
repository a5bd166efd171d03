//! Lindblad evolution and its quantum-jump unraveling in Euclidean and
//! metric inner products.
//!
//! The master equation is integrated with classical fourth-order
//! Runge-Kutta steps. Trajectories use the first-order decomposition
//! `M_0 = 1 - i H_e dt`, `M_j = L_j sqrt(dt)`; in a metric space the
//! no-jump drift may instead be the exact propagator `exp(-i H_e dt)`.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::linalg::{expm, vdot, CMatrix, CVector};
use crate::metric::Metric;
use crate::rng;
use crate::scalar::{cx, re, Cx, Real};

/// Largest admissible `dt ||H_e||_2`.
pub const STEP_GUARD: f64 = 0.1;

/// Tolerance on the normalisation of trajectory inputs.
const NORM_TOL: f64 = 1e-8;

/// Quasi-Hermiticity threshold on `||H_e^dag G - G H_e|| / (||G|| ||H_e||)`.
const QUASI_TOL: f64 = 1e-8;

/// Generator `rho' = -i[H, rho] + sum_j L_j rho L_j^dag - {L_j^dag L_j, rho}/2`
/// with cached effective Hamiltonian `H_e = H - (i/2) sum_j L_j^dag L_j`.
#[derive(Debug, Clone)]
pub struct LindbladModel<T: Real> {
    h: CMatrix<T>,
    jumps: Vec<CMatrix<T>>,
    decay: CMatrix<T>,
    effective: CMatrix<T>,
    hermitian: bool,
}

impl<T: Real> LindbladModel<T> {
    /// Model with Hermitian `H`.
    pub fn new(h: CMatrix<T>, jumps: Vec<CMatrix<T>>, tol: T) -> Result<Self> {
        let residual = h.hermiticity_residual();
        if residual > tol.max(T::lit(1e-12)) {
            return Err(Error::NotHermitian { residual: residual.as_f64() });
        }
        let mut model = Self::assemble(h, jumps)?;
        model.hermitian = true;
        Ok(model)
    }

    /// Model specified by its effective Hamiltonian; `H` is recovered as
    /// `H_e + (i/2) sum_j L_j^dag L_j` and need not be Hermitian.
    pub fn from_effective(effective: CMatrix<T>, jumps: Vec<CMatrix<T>>) -> Result<Self> {
        let n = effective.rows();
        effective.expect_square(n, "effective Hamiltonian")?;
        let decay = decay_operator(&jumps, n)?;
        let h = &effective + &decay.map(|z| z * cx(T::zero(), T::lit(0.5)));
        let hermitian = h.hermiticity_residual() <= T::lit(1e-12);
        Ok(Self { h, jumps, decay, effective, hermitian })
    }

    fn assemble(h: CMatrix<T>, jumps: Vec<CMatrix<T>>) -> Result<Self> {
        let n = h.rows();
        h.expect_square(n, "Hamiltonian")?;
        if !h.is_finite() {
            return Err(Error::NonFinite);
        }
        let decay = decay_operator(&jumps, n)?;
        let effective = &h - &decay.map(|z| z * cx(T::zero(), T::lit(0.5)));
        Ok(Self { h, jumps, decay, effective, hermitian: false })
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    pub fn hamiltonian(&self) -> &CMatrix<T> {
        &self.h
    }

    pub fn jumps(&self) -> &[CMatrix<T>] {
        &self.jumps
    }

    pub fn effective(&self) -> &CMatrix<T> {
        &self.effective
    }

    /// `sum_j L_j^dag L_j`.
    pub fn decay(&self) -> &CMatrix<T> {
        &self.decay
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Max-entry deviation of the cached `H_e` from its definition.
    pub fn effective_residual(&self) -> T {
        let rebuilt = &self.h - &self.decay.map(|z| z * cx(T::zero(), T::lit(0.5)));
        rebuilt.max_abs_diff(&self.effective)
    }

    /// Rejects `dt <= 0` and `dt ||H_e||_2 > STEP_GUARD`.
    pub fn check_step(&self, dt: T) -> Result<()> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::InvalidInput("time step must be positive".into()));
        }
        let value = dt * self.effective.norm2();
        if value > T::lit(STEP_GUARD) {
            return Err(Error::StepTooLarge { value: value.as_f64(), limit: STEP_GUARD });
        }
        Ok(())
    }
}

fn decay_operator<T: Real>(jumps: &[CMatrix<T>], n: usize) -> Result<CMatrix<T>> {
    let mut decay = CMatrix::zeros(n, n);
    for l in jumps {
        l.expect_square(n, "jump operator")?;
        if !l.is_finite() {
            return Err(Error::NonFinite);
        }
        decay += &(&l.adjoint() * l);
    }
    Ok(decay)
}

/// Right-hand side of the master equation.
pub fn lindbladian<T: Real>(rho: &CMatrix<T>, model: &LindbladModel<T>) -> CMatrix<T> {
    let i = cx(T::zero(), T::one());
    let half = T::lit(0.5);
    let comm = &(&model.h * rho) - &(rho * &model.h);
    let mut out = comm.map(|z| -z * i);
    for l in &model.jumps {
        out += &(&(l * rho) * &l.adjoint());
    }
    let anti = &(&model.decay * rho) + &(rho * &model.decay);
    out -= &anti.scale_real(half);
    out
}

/// One fourth-order Runge-Kutta step of the master equation followed by
/// symmetrisation.
pub fn lindblad_step<T: Real>(rho: &CMatrix<T>, model: &LindbladModel<T>, dt: T) -> Result<CMatrix<T>> {
    if !model.hermitian {
        return Err(Error::InvalidInput("master equation needs a Hermitian H".into()));
    }
    rho.expect_square(model.dim(), "density matrix")?;
    model.check_step(dt)?;
    let half = dt * T::lit(0.5);
    let k1 = lindbladian(rho, model);
    let k2 = lindbladian(&(rho + &k1.scale_real(half)), model);
    let k3 = lindbladian(&(rho + &k2.scale_real(half)), model);
    let k4 = lindbladian(&(rho + &k3.scale_real(dt)), model);
    let sum = &(&k1 + &k2.scale_real(T::lit(2.0))) + &(&k3.scale_real(T::lit(2.0)) + &k4);
    Ok((rho + &sum.scale_real(dt / T::lit(6.0))).hermitian_part())
}

/// `steps` consecutive [`lindblad_step`]s.
pub fn evolve_density<T: Real>(rho: &CMatrix<T>, model: &LindbladModel<T>, dt: T, steps: usize) -> Result<CMatrix<T>> {
    let mut out = rho.clone();
    for _ in 0..steps {
        out = lindblad_step(&out, model, dt)?;
    }
    Ok(out)
}

/// Outcome of one stochastic step.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpStep<T: Real> {
    pub psi: CVector<T>,
    pub jumped: Option<usize>,
    /// `dp = sum_j ||M_j psi||^2` in the active inner product.
    pub p_jump: T,
    /// `p_0 = ||M_0 psi||^2` in the active inner product.
    pub p_no_jump: T,
    /// Squared norm of the new state before any renormalisation.
    pub raw_norm: T,
    /// `sum_j tr(L_j^dag G L_j psi psi^dag) dt`, evaluated as a trace.
    pub trace_rate: T,
}

fn norm_sq<T: Real>(v: &[Cx<T>], gram: Option<&CMatrix<T>>) -> T {
    match gram {
        None => v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()),
        Some(g) => vdot(v, &g.matvec(v)).re,
    }
}

fn jump_core<T: Real, R: Rng + ?Sized>(
    psi: &[Cx<T>],
    jumps: &[CMatrix<T>],
    drift: &CMatrix<T>,
    dt: T,
    gram: Option<&CMatrix<T>>,
    renormalize: bool,
    rng: &mut R,
) -> JumpStep<T> {
    let branches: Vec<CVector<T>> = jumps.iter().map(|l| l.matvec(psi)).collect();
    let weights: Vec<T> = branches.iter().map(|b| norm_sq(b, gram) * dt).collect();
    let p_jump = weights.iter().fold(T::zero(), |a, w| a + *w);
    let projector = CMatrix::outer(psi, psi);
    let trace_rate = jumps.iter().fold(T::zero(), |acc, l| {
        let weighted = match gram {
            None => &l.adjoint() * l,
            Some(g) => &(&l.adjoint() * g) * l,
        };
        acc + (&weighted * &projector).trace().re
    }) * dt;
    let no_jump = drift.matvec(psi);
    let p_no_jump = norm_sq(&no_jump, gram);
    let r = T::lit(rng.gen::<f64>());
    if r < p_jump {
        let mut acc = T::zero();
        let j = weights
            .iter()
            .position(|w| {
                acc += *w;
                r < acc
            })
            .unwrap_or(weights.len() - 1);
        let n = norm_sq(&branches[j], gram).sqrt();
        let psi = branches[j].iter().map(|z| *z / n).collect();
        return JumpStep { psi, jumped: Some(j), p_jump, p_no_jump, raw_norm: T::one(), trace_rate };
    }
    let psi = if renormalize {
        let n = p_no_jump.sqrt();
        no_jump.iter().map(|z| *z / n).collect()
    } else {
        no_jump
    };
    JumpStep { psi, jumped: None, p_jump, p_no_jump, raw_norm: p_no_jump, trace_rate }
}

fn first_order_drift<T: Real>(effective: &CMatrix<T>, dt: T) -> CMatrix<T> {
    let n = effective.rows();
    &CMatrix::identity(n) - &effective.map(|z| z * cx(T::zero(), dt))
}

fn exact_drift<T: Real>(effective: &CMatrix<T>, dt: T) -> CMatrix<T> {
    expm(&effective.map(|z| z * cx(T::zero(), -dt)))
}

/// One Euclidean unraveling step: jump `j` with probability
/// `||L_j psi||^2 dt`, otherwise `M_0 psi` renormalised.
pub fn trajectory_step<T: Real, R: Rng + ?Sized>(
    psi: &[Cx<T>],
    model: &LindbladModel<T>,
    dt: T,
    rng: &mut R,
) -> Result<JumpStep<T>> {
    if psi.len() != model.dim() {
        return Err(dim_err(format!("state of length {} for a {}-level model", psi.len(), model.dim())));
    }
    model.check_step(dt)?;
    let n = norm_sq(psi, None);
    if (n - T::one()).abs() > T::lit(NORM_TOL) {
        return Err(Error::InvalidState(format!("state has squared norm {n}, expected 1")));
    }
    let drift = first_order_drift(&model.effective, dt);
    Ok(jump_core(psi, &model.jumps, &drift, dt, None, true, rng))
}

/// No-jump propagator used by a [`MetricStepper`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Drift {
    /// `1 - i H_e dt`.
    #[default]
    FirstOrder,
    /// `exp(-i H_e dt)`.
    Exponential,
}

/// Unraveling in a metric space with the quasi-Hermiticity of `H_e`
/// checked once at construction.
#[derive(Debug, Clone)]
pub struct MetricStepper<T: Real> {
    jumps: Vec<CMatrix<T>>,
    metric: Arc<Metric<T>>,
    dt: T,
    drift: Drift,
    drift_matrix: CMatrix<T>,
    renormalize: bool,
    quasi_residual: T,
}

impl<T: Real> MetricStepper<T> {
    pub fn new(
        model: &LindbladModel<T>,
        metric: Arc<Metric<T>>,
        dt: T,
        drift: Drift,
        renormalize: bool,
    ) -> Result<Self> {
        if metric.dim() != model.dim() {
            return Err(dim_err(format!("{}-level model with a {}-dimensional metric", model.dim(), metric.dim())));
        }
        model.check_step(dt)?;
        let q = metric.quasi_hermiticity(&model.effective, T::lit(QUASI_TOL))?;
        if !q.holds {
            return Err(Error::NotQuasiHermitian { residual: q.residual.as_f64() });
        }
        let drift_matrix = match drift {
            Drift::FirstOrder => first_order_drift(&model.effective, dt),
            Drift::Exponential => exact_drift(&model.effective, dt),
        };
        Ok(Self {
            jumps: model.jumps.clone(),
            metric,
            dt,
            drift,
            drift_matrix,
            renormalize,
            quasi_residual: q.residual,
        })
    }

    pub fn metric(&self) -> &Arc<Metric<T>> {
        &self.metric
    }

    pub fn drift(&self) -> Drift {
        self.drift
    }

    pub fn quasi_hermiticity_residual(&self) -> T {
        self.quasi_residual
    }

    /// `||M_0* M_0 - 1||_2` for the configured drift, with `M_0* = G^-1 M_0^dag G`.
    pub fn no_jump_identity_residual(&self) -> T {
        g_unitarity_residual(&self.drift_matrix, &self.metric)
    }

    /// `<psi, G psi>`.
    pub fn g_norm(&self, psi: &[Cx<T>]) -> T {
        norm_sq(psi, Some(self.metric.g()))
    }

    pub fn step<R: Rng + ?Sized>(&self, psi: &[Cx<T>], rng: &mut R) -> Result<JumpStep<T>> {
        if psi.len() != self.metric.dim() {
            return Err(dim_err(format!("state of length {} in dimension {}", psi.len(), self.metric.dim())));
        }
        let n = self.g_norm(psi);
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::InvalidState("state has vanishing G-norm".into()));
        }
        Ok(jump_core(psi, &self.jumps, &self.drift_matrix, self.dt, Some(self.metric.g()), self.renormalize, rng))
    }
}

fn g_unitarity_residual<T: Real>(m: &CMatrix<T>, metric: &Metric<T>) -> T {
    let star = &(metric.g_inv() * &m.adjoint()) * metric.g();
    (&(&star * m) - &CMatrix::identity(m.rows())).norm2()
}

/// One unraveling step in the metric space: jump probabilities
/// `||M_j psi||_G^2`, first-order no-jump drift, G-norm renormalisation.
pub fn metric_trajectory_step<T: Real, R: Rng + ?Sized>(
    psi: &[Cx<T>],
    model: &LindbladModel<T>,
    metric: Arc<Metric<T>>,
    dt: T,
    rng: &mut R,
) -> Result<JumpStep<T>> {
    let stepper = MetricStepper::new(model, metric, dt, Drift::FirstOrder, true)?;
    let n = stepper.g_norm(psi);
    if psi.len() == stepper.metric.dim() && (n - T::one()).abs() > T::lit(NORM_TOL) {
        return Err(Error::InvalidState(format!("state has G-norm {n}, expected 1")));
    }
    stepper.step(psi, rng)
}

/// `||M_0* M_0 - 1||_2` for `M_0 = 1 - i H_e dt`.
pub fn no_jump_identity_residual<T: Real>(model: &LindbladModel<T>, metric: &Metric<T>, dt: T) -> Result<T> {
    if metric.dim() != model.dim() {
        return Err(dim_err("metric and model dimensions differ"));
    }
    Ok(g_unitarity_residual(&first_order_drift(&model.effective, dt), metric))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Inner product in which trajectories run.
#[derive(Debug, Clone)]
pub enum Space<T: Real> {
    Euclidean,
    Metric(Arc<Metric<T>>),
}

/// Replica ensemble settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig<T> {
    pub dt: T,
    pub steps: usize,
    pub replicas: usize,
    pub seed: u64,
    /// Steps between recorded checkpoints.
    pub checkpoint_every: usize,
    #[serde(default)]
    pub drift: Drift,
    /// Renormalise after no-jump steps.
    pub renormalize: bool,
}

impl<T: Real> TrajectoryConfig<T> {
    pub fn new(dt: T, steps: usize, replicas: usize, seed: u64) -> Self {
        Self {
            dt,
            steps,
            replicas,
            seed,
            checkpoint_every: (steps / 10).max(1),
            drift: Drift::FirstOrder,
            renormalize: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidInput("dt must be positive".into()));
        }
        if self.steps == 0 || self.replicas == 0 || self.checkpoint_every == 0 {
            return Err(Error::InvalidInput("steps, replicas and checkpoint interval must be positive".into()));
        }
        Ok(())
    }
}

/// Replica statistics at one recorded time.
#[derive(Debug, Clone, Serialize)]
pub struct Checkpoint<T: Real> {
    pub step: usize,
    pub t: T,
    pub g_norm_mean: T,
    pub g_norm_min: T,
    pub g_norm_max: T,
    /// Squared norm before renormalisation on the latest step.
    pub raw_g_norm_mean: T,
    pub raw_g_norm_min: T,
    pub raw_g_norm_max: T,
    /// Jumps so far, summed over replicas.
    pub jumps: u64,
    /// Mean per-step jump probability since the previous checkpoint.
    pub p_jump_mean: T,
    /// Mean per-step `sum_j tr(L_j^dag G L_j rho) dt` since the previous checkpoint.
    pub trace_rate_mean: T,
    /// Replica average of the normalised state `psi psi^dag G / <psi, G psi>`.
    pub density: CMatrix<T>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryReport<T: Real> {
    pub space: &'static str,
    pub config: TrajectoryConfig<T>,
    pub quasi_hermiticity_residual: Option<T>,
    pub no_jump_identity_residual: Option<T>,
    pub checkpoints: Vec<Checkpoint<T>>,
}

struct Sample<T: Real> {
    psi: CVector<T>,
    norm: T,
    raw: T,
    jumps: u64,
    p_jump: T,
    trace_rate: T,
}

/// Runs `replicas` independent trajectories from `psi0`. Replica `r` draws
/// from the stream `(seed, r)`; aggregation is in replica order.
pub fn run_trajectories<T: Real>(
    model: &LindbladModel<T>,
    psi0: &[Cx<T>],
    space: &Space<T>,
    config: &TrajectoryConfig<T>,
) -> Result<TrajectoryReport<T>> {
    config.validate()?;
    if psi0.len() != model.dim() {
        return Err(dim_err(format!("state of length {} for a {}-level model", psi0.len(), model.dim())));
    }
    model.check_step(config.dt)?;
    let (stepper, gram) = match space {
        Space::Euclidean => (None, None),
        Space::Metric(m) => {
            let s = MetricStepper::new(model, m.clone(), config.dt, config.drift, config.renormalize)?;
            (Some(s), Some(m.g().clone()))
        }
    };
    let n0 = norm_sq(psi0, gram.as_ref());
    if (n0 - T::one()).abs() > T::lit(NORM_TOL) {
        return Err(Error::InvalidState(format!("initial state has squared norm {n0}, expected 1")));
    }
    let drift = match config.drift {
        Drift::FirstOrder => first_order_drift(&model.effective, config.dt),
        Drift::Exponential => exact_drift(&model.effective, config.dt),
    };
    let marks: Vec<usize> =
        (0..=config.steps).filter(|s| s % config.checkpoint_every == 0 || *s == config.steps).collect();

    let per_replica: Vec<Vec<Sample<T>>> = (0..config.replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(config.seed, r as u64);
            let mut psi = psi0.to_vec();
            let mut raw = n0;
            let mut jumps = 0u64;
            let (mut p_sum, mut rate_sum, mut since) = (T::zero(), T::zero(), 0usize);
            let mut out = Vec::with_capacity(marks.len());
            let record = |psi: &CVector<T>, raw, jumps, p_sum: T, rate_sum: T, since: usize| {
                let k = T::lit(since.max(1) as f64);
                Sample {
                    psi: psi.clone(),
                    norm: norm_sq(psi, gram.as_ref()),
                    raw,
                    jumps,
                    p_jump: p_sum / k,
                    trace_rate: rate_sum / k,
                }
            };
            out.push(record(&psi, raw, jumps, p_sum, rate_sum, since));
            let mut next = 1;
            for step in 1..=config.steps {
                let s = match &stepper {
                    Some(st) => st.step(&psi, &mut rng).expect("validated stepper"),
                    None => jump_core(&psi, &model.jumps, &drift, config.dt, None, config.renormalize, &mut rng),
                };
                psi = s.psi;
                raw = s.raw_norm;
                jumps += s.jumped.is_some() as u64;
                p_sum += s.p_jump;
                rate_sum += s.trace_rate;
                since += 1;
                if next < marks.len() && marks[next] == step {
                    out.push(record(&psi, raw, jumps, p_sum, rate_sum, since));
                    p_sum = T::zero();
                    rate_sum = T::zero();
                    since = 0;
                    next += 1;
                }
            }
            out
        })
        .collect();

    let count = T::lit(config.replicas as f64);
    let dim = model.dim();
    let checkpoints = marks
        .iter()
        .enumerate()
        .map(|(k, &step)| {
            let mut c = Checkpoint {
                step,
                t: config.dt * T::lit(step as f64),
                g_norm_mean: T::zero(),
                g_norm_min: T::infinity(),
                g_norm_max: T::neg_infinity(),
                raw_g_norm_mean: T::zero(),
                raw_g_norm_min: T::infinity(),
                raw_g_norm_max: T::neg_infinity(),
                jumps: 0,
                p_jump_mean: T::zero(),
                trace_rate_mean: T::zero(),
                density: CMatrix::zeros(dim, dim),
            };
            for replica in &per_replica {
                let s = &replica[k];
                c.g_norm_mean += s.norm / count;
                c.g_norm_min = c.g_norm_min.min(s.norm);
                c.g_norm_max = c.g_norm_max.max(s.norm);
                c.raw_g_norm_mean += s.raw / count;
                c.raw_g_norm_min = c.raw_g_norm_min.min(s.raw);
                c.raw_g_norm_max = c.raw_g_norm_max.max(s.raw);
                c.jumps += s.jumps;
                c.p_jump_mean += s.p_jump / count;
                c.trace_rate_mean += s.trace_rate / count;
                let mut proj = CMatrix::outer(&s.psi, &s.psi);
                if let Some(g) = &gram {
                    proj = &proj * g;
                }
                c.density += &proj.scale_real(T::one() / (s.norm * count));
            }
            c
        })
        .collect();

    Ok(TrajectoryReport {
        space: if stepper.is_some() { "metric" } else { "euclidean" },
        config: config.clone(),
        quasi_hermiticity_residual: stepper.as_ref().map(|s| s.quasi_residual),
        no_jump_identity_residual: stepper.as_ref().map(|s| s.no_jump_identity_residual()),
        checkpoints,
    })
}

/// Conversion between the similarity form `eta^-1 rho eta` and the
/// weighting form `rho G` of a metric-space density operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConventionDirection {
    SimilarityToWeighting,
    WeightingToSimilarity,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConventionConversion<T: Real> {
    /// Converted operator, normalised to unit trace.
    pub matrix: CMatrix<T>,
    /// `tr(rho G)` for the Euclidean state `rho` behind both forms.
    pub weighting_trace: T,
    /// Largest disagreement of `tr(rho_s eta^-1 O eta)` and
    /// `tr(rho G G^-1 O)` over a Hermitian operator basis.
    pub cross_check_residual: T,
}

/// Converts between the two density conventions and cross-checks
/// expectation values on a Hermitian basis.
pub fn convert_state_convention<T: Real>(
    m: &CMatrix<T>,
    metric: &Metric<T>,
    direction: ConventionDirection,
) -> Result<ConventionConversion<T>> {
    let n = metric.dim();
    m.expect_square(n, "density operator")?;
    let rho = match direction {
        ConventionDirection::SimilarityToWeighting => metric.hermitize(m)?,
        ConventionDirection::WeightingToSimilarity => m * metric.g_inv(),
    };
    let tr = rho.trace();
    if !(tr.norm() > T::epsilon()) {
        return Err(Error::InvalidState("density operator has zero trace".into()));
    }
    let rho = rho.map(|z| z / tr);
    let similarity = metric.dehermitize(&rho)?;
    let weighting = &rho * metric.g();
    let weighting_trace = weighting.trace().re;
    let mut residual = T::zero();
    for o in hermitian_basis(n) {
        let a = (&similarity * &metric.dehermitize(&o)?).trace();
        let b = (&weighting * &(metric.g_inv() * &o)).trace();
        residual = residual.max((a - b).norm());
    }
    let matrix = match direction {
        ConventionDirection::SimilarityToWeighting => weighting.scale_real(T::one() / weighting_trace),
        ConventionDirection::WeightingToSimilarity => similarity,
    };
    Ok(ConventionConversion { matrix, weighting_trace, cross_check_residual: residual })
}

fn hermitian_basis<T: Real>(n: usize) -> Vec<CMatrix<T>> {
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in j..n {
            let mut a = CMatrix::zeros(n, n);
            a[(j, k)] = re(T::one());
            a[(k, j)] = re(T::one());
            out.push(a);
            if j != k {
                let mut b = CMatrix::zeros(n, n);
                b[(j, k)] = cx(T::zero(), T::one());
                b[(k, j)] = cx(T::zero(), -T::one());
                out.push(b);
            }
        }
    }
    out
}
