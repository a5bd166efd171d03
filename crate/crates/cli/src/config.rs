//! Run configuration: one TOML document per run, matrices inline or as
//! JSON files resolved relative to the configuration file.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use phq_core::dynamics::Drift;
use phq_core::metric::metric_from_hamiltonian;
use phq_core::{CMatrix64, Error, Metric64, C64};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{config_err, CliError, CliResult};

/// A matrix given inline as `{rows, cols, data}` or as a path to a JSON
/// file holding that object.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MatrixSource {
    Path(String),
    Inline(CMatrix64),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    pub g: Option<MatrixSource>,
    pub hamiltonian: Option<MatrixSource>,
    pub lambda: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMode {
    #[default]
    Intertwiner,
    Hamiltonian,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSection {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub mode: PartitionMode,
    pub g: MatrixSource,
    pub g_prime: MatrixSource,
    /// Intertwiner from `g_prime` to `g`; identity when omitted.
    pub t: Option<MatrixSource>,
    pub hamiltonian: Option<MatrixSource>,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_budget() -> usize {
    8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomoSection {
    pub qubits: usize,
    /// Euclidean density matrix of the simulated state.
    pub rho: Option<MatrixSource>,
    pub shots: Option<u64>,
    /// Per-setting measurement directions, one unit vector per qubit.
    /// All `3^n` Pauli settings when omitted.
    pub directions: Option<Vec<Vec<[f64; 3]>>>,
    /// JSON-lines dataset to reconstruct from.
    pub dataset: Option<String>,
    /// Exact frame expectations to reconstruct from.
    pub expectations: Option<Vec<f64>>,
    /// Custom frame in the metric representation; deformed Pauli frame when omitted.
    pub frame_elements: Option<Vec<MatrixSource>>,
    pub frame_weights: Option<Vec<f64>>,
    /// Euclidean density matrix to compare the reconstruction with.
    pub truth: Option<MatrixSource>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoSignalSection {
    pub dims: Vec<usize>,
    /// Euclidean density matrix of the shared state.
    pub rho: MatrixSource,
    /// POVM elements on the full space, in the metric representation.
    pub povm: Option<Vec<MatrixSource>>,
    /// Effects `Pi_m` on the second factor; embedded as `eta^-1 (I (x) Pi_m) eta`.
    pub local_effects: Option<Vec<MatrixSource>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    #[default]
    Euclidean,
    Metric,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    pub hamiltonian: Option<MatrixSource>,
    pub effective: Option<MatrixSource>,
    #[serde(default)]
    pub jumps: Vec<MatrixSource>,
    pub psi0: Vec<[f64; 2]>,
    pub dt: f64,
    pub steps: usize,
    pub replicas: usize,
    pub checkpoint_every: Option<usize>,
    #[serde(default)]
    pub space: SpaceKind,
    #[serde(default)]
    pub drift: Drift,
    #[serde(default = "default_true")]
    pub renormalize: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraKind {
    #[default]
    Full,
    Generated,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnsSection {
    #[serde(default)]
    pub algebra: AlgebraKind,
    pub dim: Option<usize>,
    #[serde(default)]
    pub generators: Vec<MatrixSource>,
    pub rho: MatrixSource,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub output: Option<String>,
    pub metric: Option<MetricSection>,
    pub partition: Option<PartitionSection>,
    pub tomo: Option<TomoSection>,
    pub nosignal: Option<NoSignalSection>,
    pub dynamics: Option<DynamicsSection>,
    pub gns: Option<GnsSection>,
}

/// Parsed configuration plus the context needed to resolve it.
#[derive(Debug)]
pub struct Loaded {
    pub file: ConfigFile,
    pub dir: PathBuf,
    pub sha256: String,
}

pub fn load(path: &Path) -> CliResult<Loaded> {
    let bytes = fs::read(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { file, dir, sha256: hex::encode(Sha256::digest(&bytes)) })
}

impl Loaded {
    pub fn resolve_path(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.dir.join(p)
        }
    }

    pub fn matrix(&self, src: &MatrixSource) -> CliResult<CMatrix64> {
        match src {
            MatrixSource::Inline(m) => Ok(m.clone()),
            MatrixSource::Path(p) => {
                let path = self.resolve_path(p);
                let text = fs::read_to_string(&path).map_err(|source| CliError::Read { path: path.clone(), source })?;
                serde_json::from_str(&text).map_err(|e| CliError::Parse { path, message: e.to_string() })
            }
        }
    }

    pub fn matrices(&self, srcs: &[MatrixSource]) -> CliResult<Vec<CMatrix64>> {
        srcs.iter().map(|s| self.matrix(s)).collect()
    }

    /// Metric from the `[metric]` section; identity of dimension `dim`
    /// when the section is absent.
    pub fn metric(&self, dim: usize, tol: f64) -> CliResult<Arc<Metric64>> {
        let metric = match &self.file.metric {
            None => Metric64::identity(dim),
            Some(section) => self.metric_from_section(section, tol)?.0,
        };
        if metric.dim() != dim {
            return Err(
                Error::DimensionMismatch(format!("metric has dimension {}, expected {dim}", metric.dim())).into()
            );
        }
        Ok(Arc::new(metric))
    }

    /// Metric and, when built from one, the Hamiltonian it was built for.
    pub fn metric_from_section(&self, section: &MetricSection, tol: f64) -> CliResult<(Metric64, Option<CMatrix64>)> {
        match (&section.g, &section.hamiltonian) {
            (Some(_), Some(_)) => Err(config_err("[metric] takes either `g` or `hamiltonian`, not both")),
            (None, None) => Err(config_err("[metric] needs `g` or `hamiltonian`")),
            (Some(g), None) => {
                if section.lambda.is_some() {
                    return Err(config_err("`lambda` applies only with `hamiltonian`"));
                }
                Ok((explicit_metric(self.matrix(g)?, tol)?, None))
            }
            (None, Some(h)) => {
                let h = self.matrix(h)?;
                let lambda = section.lambda.clone().unwrap_or_else(|| vec![1.0; h.rows()]);
                Ok((metric_from_hamiltonian(&h, &lambda, tol)?, Some(h)))
            }
        }
    }
}

/// A user-supplied `G` that is not positive definite is bad input rather
/// than a numerical failure.
pub fn explicit_metric(g: CMatrix64, tol: f64) -> CliResult<Metric64> {
    Metric64::new(g, tol).map_err(|e| match e {
        Error::NotPositiveDefinite { min_eigenvalue } => {
            config_err(format!("metric is not positive definite (smallest eigenvalue {min_eigenvalue:e})"))
        }
        other => other.into(),
    })
}

pub fn bipartite_dims(dims: &[usize]) -> CliResult<(usize, usize)> {
    match dims {
        [a, b] if *a > 0 && *b > 0 => Ok((*a, *b)),
        _ => Err(config_err(format!("dims must be two positive factor dimensions, got {dims:?}"))),
    }
}

pub fn vector(entries: &[[f64; 2]]) -> Vec<C64> {
    entries.iter().map(|[a, b]| C64::new(*a, *b)).collect()
}
