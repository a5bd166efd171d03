use std::fs;

use phq_core::tomography::{
    expectations_from_records, pauli_frame, pauli_settings, reconstruct as linear_inversion, simulate_dataset,
    trace_distance, MeasurementRecord, OperatorFrame,
};
use phq_core::{CMatrix64, MetricState64};
use serde::Serialize;

use super::{Ctx, Outcome};
use crate::config::TomoSection;
use crate::error::{config_err, CliError, CliResult};

fn dim_of(section: &TomoSection) -> CliResult<usize> {
    if section.qubits == 0 || section.qubits > 6 {
        return Err(config_err(format!("qubits must be between 1 and 6, got {}", section.qubits)));
    }
    Ok(1 << section.qubits)
}

/// Writes one measurement record per line.
pub fn simulate(ctx: &Ctx) -> CliResult<Outcome> {
    let section = ctx.section(&ctx.loaded.file.tomo, "tomo")?;
    let dim = dim_of(section)?;
    let rho = section.rho.as_ref().ok_or_else(|| config_err("simulation needs `rho`"))?;
    let shots = section.shots.ok_or_else(|| config_err("simulation needs `shots`"))?;
    let seed = ctx.require_seed()?;
    let metric = ctx.loaded.metric(dim, ctx.tol)?;
    let state = MetricState64::from_euclidean(&ctx.loaded.matrix(rho)?, metric, ctx.tol.max(1e-8))?;
    let settings = section.directions.clone().unwrap_or_else(|| pauli_settings(section.qubits));
    let records = simulate_dataset(&state, &settings, shots, seed)?;
    let mut text = String::new();
    for r in &records {
        text.push_str(&serde_json::to_string(r).map_err(|e| config_err(e.to_string()))?);
        text.push('\n');
    }
    Ok(Outcome { text, exit: 0 })
}

#[derive(Serialize)]
struct ReconstructionReport {
    qubits: usize,
    source: &'static str,
    frame_size: usize,
    condition_number: f64,
    projected: bool,
    min_eigenvalue: f64,
    rho_bar_raw: CMatrix64,
    rho_bar: CMatrix64,
    rho: CMatrix64,
    purity: f64,
    trace_distance_to_truth: Option<f64>,
}

fn read_dataset(ctx: &Ctx, path: &str) -> CliResult<Vec<MeasurementRecord>> {
    let path = ctx.loaded.resolve_path(path);
    let text = fs::read_to_string(&path).map_err(|source| CliError::Read { path: path.clone(), source })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| CliError::Parse { path: path.clone(), message: format!("line {}: {e}", i + 1) })
        })
        .collect()
}

pub fn reconstruct(ctx: &Ctx) -> CliResult<Outcome> {
    let section = ctx.section(&ctx.loaded.file.tomo, "tomo")?;
    let dim = dim_of(section)?;
    let metric = ctx.loaded.metric(dim, ctx.tol)?;
    let frame = match (&section.frame_elements, &section.frame_weights) {
        (None, None) => pauli_frame(section.qubits, metric.clone())?,
        (Some(e), Some(w)) => OperatorFrame::new(ctx.loaded.matrices(e)?, w.clone(), metric.clone(), ctx.tol)?,
        _ => return Err(config_err("`frame_elements` and `frame_weights` go together")),
    };
    let (source, expectations) = match (&section.dataset, &section.expectations) {
        (Some(path), None) => {
            if section.frame_elements.is_some() {
                return Err(config_err("datasets reconstruct with the Pauli frame only"));
            }
            ("dataset", expectations_from_records(&read_dataset(ctx, path)?, section.qubits)?)
        }
        (None, Some(e)) => ("expectations", e.clone()),
        _ => return Err(config_err("reconstruction needs exactly one of `dataset` or `expectations`")),
    };
    let rec = linear_inversion(&expectations, &frame, ctx.tol)?;
    let trace_distance_to_truth = match &section.truth {
        Some(t) => {
            let truth = MetricState64::from_euclidean(&ctx.loaded.matrix(t)?, metric.clone(), ctx.tol.max(1e-8))?;
            Some(trace_distance(&rec.state, &truth)?)
        }
        None => None,
    };
    let report = ReconstructionReport {
        qubits: section.qubits,
        source,
        frame_size: frame.len(),
        condition_number: rec.condition_number,
        projected: rec.projected,
        min_eigenvalue: rec.min_eigenvalue,
        rho_bar_raw: rec.raw.clone(),
        rho_bar: rec.state.rho_bar().clone(),
        rho: rec.state.hermitized(),
        purity: rec.state.purity(),
        trace_distance_to_truth,
    };
    ctx.report("tomo reconstruct", report)
}
