use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::linalg::{kron, spin_along, unitary_propagator, CMatrix};
use crate::metric::MetricState;
use crate::rng;
use crate::scalar::Real;

/// Stern-Gerlach setting: a field `B` that rotates the spin so that a
/// `z`-detector measures along `n = (sin t cos p, sin t sin p, cos t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SternGerlachConfig<T> {
    pub theta: T,
    pub phi: T,
    pub gyromagnetic: T,
    pub interaction_time: T,
}

impl<T: Real> SternGerlachConfig<T> {
    pub fn new(theta: T, phi: T, gyromagnetic: T, interaction_time: T) -> Result<Self> {
        if !(interaction_time > T::zero()) || !interaction_time.is_finite() {
            return Err(Error::InvalidInput("interaction time must be positive".into()));
        }
        if gyromagnetic == T::zero() || !gyromagnetic.is_finite() {
            return Err(Error::InvalidInput("gyromagnetic ratio must be finite and non-zero".into()));
        }
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { theta, phi, gyromagnetic, interaction_time })
    }

    /// Setting measuring along the unit vector `n`.
    pub fn along(n: [T; 3], gyromagnetic: T, interaction_time: T) -> Result<Self> {
        let (theta, phi) = angles(n)?;
        Self::new(theta, phi, gyromagnetic, interaction_time)
    }

    pub fn direction(&self) -> [T; 3] {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        [st * self.phi.cos(), st * self.phi.sin(), ct]
    }

    /// Rotation axis `(-sin p, cos p, 0)`.
    pub fn axis(&self) -> [T; 3] {
        [-self.phi.sin(), self.phi.cos(), T::zero()]
    }

    /// Field `B = theta axis / (gamma t)`.
    pub fn field(&self) -> [T; 3] {
        let s = self.theta / (self.gyromagnetic * self.interaction_time);
        self.axis().map(|a| a * s)
    }

    /// `U = exp(-i (gamma t / 2) sigma.B)`, which maps `sigma_z` onto
    /// `sigma.n` by conjugation: `U sigma_z U^dag = sigma.n`.
    pub fn rotation(&self) -> CMatrix<T> {
        let b = self.field();
        let h = spin_along(b).scale_real(self.gyromagnetic * T::lit(0.5));
        unitary_propagator(&h, self.interaction_time)
    }
}

/// Polar and azimuthal angles of a unit vector.
fn angles<T: Real>(n: [T; 3]) -> Result<(T, T)> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if !norm.is_finite() || (norm - T::one()).abs() > T::lit(1e-8) {
        return Err(Error::InvalidInput(format!("direction has norm {norm}, expected 1")));
    }
    let z = (n[2] / norm).max(-T::one()).min(T::one());
    Ok((z.acos(), n[1].atan2(n[0])))
}

/// Rotation for a single party measuring along `n` (unit gyromagnetic
/// ratio and interaction time).
pub fn axis_rotation<T: Real>(n: [T; 3]) -> Result<CMatrix<T>> {
    Ok(SternGerlachConfig::along(n, T::one(), T::one())?.rotation())
}

/// Outcome distribution of a single spin-1/2 measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeProbabilities<T> {
    /// `p(m = +1/2 | n)`.
    pub plus_half: T,
    /// `p(m = -1/2 | n)`.
    pub minus_half: T,
}

impl<T: Real> OutcomeProbabilities<T> {
    /// `sum_m m p(m|n)`.
    pub fn mean(&self) -> T {
        (self.plus_half - self.minus_half) * T::lit(0.5)
    }
}

/// `p(m|n) = <m| U^dag rho U |m>` on the Hermitised qubit state.
pub fn stern_gerlach_probabilities<T: Real>(
    state: &MetricState<T>,
    config: &SternGerlachConfig<T>,
) -> Result<OutcomeProbabilities<T>> {
    if state.dim() != 2 {
        return Err(dim_err(format!("spin measurement needs a qubit, got dimension {}", state.dim())));
    }
    let u = config.rotation();
    let rotated = &(&u.adjoint() * &state.hermitized()) * &u;
    let p = rotated[(0, 0)].re.max(T::zero()).min(T::one());
    Ok(OutcomeProbabilities { plus_half: p, minus_half: T::one() - p })
}

/// Counts for one joint outcome of one measurement setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub party_dirs: Vec<[f64; 3]>,
    /// Spin outcomes `+0.5` or `-0.5`, one per party.
    pub outcomes: Vec<f64>,
    pub count: u64,
}

/// Joint outcome probabilities of a product measurement, indexed by the bit
/// string of outcomes (bit 0 is `m = +1/2`, most significant party first).
fn joint_probabilities<T: Real>(rho: &CMatrix<T>, dirs: &[[T; 3]]) -> Result<Vec<f64>> {
    let mut u = CMatrix::identity(1);
    for &d in dirs {
        u = kron(&u, &axis_rotation(d)?);
    }
    let rotated = &(&u.adjoint() * rho) * &u;
    let raw: Vec<f64> = (0..rotated.rows()).map(|k| rotated[(k, k)].re.as_f64().max(0.0)).collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidState("measurement probabilities vanish".into()));
    }
    Ok(raw.into_iter().map(|p| p / total).collect())
}

fn sample_counts<R: Rng>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cumulative.push(acc);
    }
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let x: f64 = rng.gen::<f64>() * acc;
        let k = cumulative.partition_point(|&c| c <= x).min(probs.len() - 1);
        counts[k] += 1;
    }
    counts
}

/// Simulates `shots` runs of every setting. Setting `i` draws from the
/// stream `(seed, i)`, so the result does not depend on thread count.
/// Every outcome tuple is reported, including those never observed.
pub fn simulate_dataset<T: Real>(
    state: &MetricState<T>,
    settings: &[Vec<[T; 3]>],
    shots: u64,
    seed: u64,
) -> Result<Vec<MeasurementRecord>> {
    let rho = state.hermitized();
    let per_setting = settings
        .par_iter()
        .enumerate()
        .map(|(i, dirs)| {
            if dirs.is_empty() || 1usize << dirs.len() != state.dim() {
                return Err(dim_err(format!(
                    "setting {i} has {} parties for a state of dimension {}",
                    dirs.len(),
                    state.dim()
                )));
            }
            let probs = joint_probabilities(&rho, dirs)?;
            let counts = sample_counts(&probs, shots, &mut rng::stream(seed, i as u64));
            let n = dirs.len();
            let party_dirs: Vec<[f64; 3]> = dirs.iter().map(|d| d.map(|x| x.as_f64())).collect();
            Ok(counts
                .into_iter()
                .enumerate()
                .map(|(k, count)| MeasurementRecord {
                    party_dirs: party_dirs.clone(),
                    outcomes: (0..n).map(|p| if (k >> (n - 1 - p)) & 1 == 0 { 0.5 } else { -0.5 }).collect(),
                    count,
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_setting.into_iter().flatten().collect())
}

/// All `3^n` combinations of `x`, `y`, `z` axes for `n` parties.
pub fn pauli_settings<T: Real>(n: usize) -> Vec<Vec<[T; 3]>> {
    let axes = [[T::one(), T::zero(), T::zero()], [T::zero(), T::one(), T::zero()], [T::zero(), T::zero(), T::one()]];
    let total = 3usize.pow(n as u32);
    (0..total)
        .map(|mut k| {
            let mut dirs = vec![axes[0]; n];
            for slot in dirs.iter_mut().rev() {
                *slot = axes[k % 3];
                k /= 3;
            }
            dirs
        })
        .collect()
}
