use phq_core::dynamics::{run_trajectories, LindbladModel, Space, TrajectoryConfig};

use super::{Ctx, Outcome};
use crate::config::{vector, SpaceKind};
use crate::error::{config_err, CliResult};

pub fn run(ctx: &Ctx) -> CliResult<Outcome> {
    let section = ctx.section(&ctx.loaded.file.dynamics, "dynamics")?;
    let jumps = ctx.loaded.matrices(&section.jumps)?;
    let model = match (&section.hamiltonian, &section.effective) {
        (Some(h), None) => LindbladModel::new(ctx.loaded.matrix(h)?, jumps, ctx.tol.max(1e-12))?,
        (None, Some(he)) => LindbladModel::from_effective(ctx.loaded.matrix(he)?, jumps)?,
        _ => return Err(config_err("give exactly one of `hamiltonian` or `effective`")),
    };
    let seed = ctx.require_seed()?;
    let mut config = TrajectoryConfig::new(section.dt, section.steps, section.replicas, seed);
    if let Some(every) = section.checkpoint_every {
        config.checkpoint_every = every;
    }
    config.drift = section.drift;
    config.renormalize = section.renormalize;
    let space = match section.space {
        SpaceKind::Euclidean => {
            if ctx.loaded.file.metric.is_some() {
                return Err(config_err("a [metric] section needs space = \"metric\""));
            }
            Space::Euclidean
        }
        SpaceKind::Metric => Space::Metric(ctx.loaded.metric(model.dim(), ctx.tol)?),
    };
    let report = run_trajectories(&model, &vector(&section.psi0), &space, &config)?;
    ctx.report("dynamics", report)
}
