use phq_core::linalg::kron;
use phq_core::tomography::{verify_no_signalling, NoSignalling};
use phq_core::{CMatrix64, MetricState64};
use serde::Serialize;

use super::{Ctx, Outcome};
use crate::config::bipartite_dims;
use crate::error::{config_err, CliResult};

#[derive(Serialize)]
struct NoSignalReport {
    dims: (usize, usize),
    outcomes: usize,
    /// Largest deviation to three significant digits.
    deviation_display: String,
    #[serde(flatten)]
    verdict: NoSignalling<f64>,
}

pub fn run(ctx: &Ctx) -> CliResult<Outcome> {
    let section = ctx.section(&ctx.loaded.file.nosignal, "nosignal")?;
    let dims = bipartite_dims(&section.dims)?;
    let metric = ctx.loaded.metric(dims.0 * dims.1, ctx.tol)?;
    let rho = ctx.loaded.matrix(&section.rho)?;
    let state = MetricState64::from_euclidean(&rho, metric.clone(), ctx.tol.max(1e-8))?;
    let povm = match (&section.povm, &section.local_effects) {
        (Some(p), None) => ctx.loaded.matrices(p)?,
        (None, Some(effects)) => {
            let id = CMatrix64::identity(dims.0);
            ctx.loaded
                .matrices(effects)?
                .iter()
                .map(|pi| {
                    pi.expect_square(dims.1, "local effect")?;
                    metric.dehermitize(&kron(&id, pi))
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        _ => return Err(config_err("give exactly one of `povm` or `local_effects`")),
    };
    let verdict = verify_no_signalling(&state, dims, &povm, ctx.tol)?;
    let report = NoSignalReport {
        dims,
        outcomes: povm.len(),
        deviation_display: format!("{:.2e}", verdict.deviation.max(verdict.luders_deviation)),
        verdict,
    };
    ctx.report("nosignal", report)
}
