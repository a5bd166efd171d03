use phq_core::partition::{hamiltonian_compatible_class, same_bipartition, Equivalence, Verdict};
use phq_core::CMatrix64;
use serde::Serialize;

use super::{Ctx, Outcome};
use crate::config::{bipartite_dims, explicit_metric, PartitionMode};
use crate::error::{config_err, CliResult};

/// Exit status for a search that neither found nor excluded a witness.
pub const UNDETERMINED: i32 = 4;

#[derive(Serialize)]
struct IntertwinerReport {
    verdict: Verdict,
    dims: (usize, usize),
    #[serde(flatten)]
    equivalence: Equivalence<f64>,
}

pub fn run(ctx: &Ctx) -> CliResult<Outcome> {
    let section = ctx.section(&ctx.loaded.file.partition, "partition")?;
    let dims = bipartite_dims(&section.dims)?;
    let g = explicit_metric(ctx.loaded.matrix(&section.g)?, ctx.tol)?;
    let g_prime = explicit_metric(ctx.loaded.matrix(&section.g_prime)?, ctx.tol)?;
    match section.mode {
        PartitionMode::Intertwiner => {
            if section.hamiltonian.is_some() {
                return Err(config_err("`hamiltonian` applies only with mode = \"hamiltonian\""));
            }
            let t = match &section.t {
                Some(t) => ctx.loaded.matrix(t)?,
                None => CMatrix64::identity(g.dim()),
            };
            let equivalence = same_bipartition(&g, &g_prime, &t, dims, ctx.tol)?;
            let verdict = if equivalence.equivalent { Verdict::Equivalent } else { Verdict::NotEquivalent };
            ctx.report("partition", IntertwinerReport { verdict, dims, equivalence })
        }
        PartitionMode::Hamiltonian => {
            if section.t.is_some() {
                return Err(config_err("`t` applies only with mode = \"intertwiner\""));
            }
            let h =
                section.hamiltonian.as_ref().ok_or_else(|| config_err("mode = \"hamiltonian\" needs `hamiltonian`"))?;
            let h = ctx.loaded.matrix(h)?;
            let seed = ctx.require_seed()?;
            let report = hamiltonian_compatible_class(&h, &g, &g_prime, dims, ctx.tol, section.budget, seed)?;
            let undetermined = report.verdict == Verdict::Undetermined;
            let mut out = ctx.report("partition", report)?;
            if undetermined {
                out.exit = UNDETERMINED;
            }
            Ok(out)
        }
    }
}
