use phq_core::linalg::eigh;
use phq_core::metric::is_quasi_hermitian;
use phq_core::CMatrix64;
use serde::Serialize;

use super::{Ctx, Outcome};
use crate::error::CliResult;

#[derive(Serialize)]
struct MetricReport {
    metric: CMatrix64,
    eta: CMatrix64,
    min_eigenvalue: f64,
    /// `||H^dag G - G H||_2 / (||H||_2 ||G||_2)`, present when built from a Hamiltonian.
    pseudo_hermiticity_residual: Option<f64>,
    lambda: Option<Vec<f64>>,
}

pub fn run(ctx: &Ctx) -> CliResult<Outcome> {
    let section = ctx.section(&ctx.loaded.file.metric, "metric")?;
    let (metric, h) = ctx.loaded.metric_from_section(section, ctx.tol)?;
    let residual = match &h {
        Some(h) => Some(is_quasi_hermitian(h, &metric, ctx.tol)?.residual),
        None => None,
    };
    let lambda = h.as_ref().map(|h| section.lambda.clone().unwrap_or_else(|| vec![1.0; h.rows()]));
    let report = MetricReport {
        metric: metric.g().clone(),
        eta: metric.eta().clone(),
        min_eigenvalue: eigh(metric.g()).0[0],
        pseudo_hermiticity_residual: residual,
        lambda,
    };
    ctx.report("metric", report)
}
