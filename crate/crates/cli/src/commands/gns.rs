use std::sync::Arc;

use phq_core::gns::{close_algebra, gns_construct, MatrixAlgebra, StateFunctional};

use super::{Ctx, Outcome};
use crate::config::AlgebraKind;
use crate::error::{config_err, CliResult};

pub fn run(ctx: &Ctx) -> CliResult<Outcome> {
    let section = ctx.section(&ctx.loaded.file.gns, "gns")?;
    let rho = ctx.loaded.matrix(&section.rho)?;
    let algebra = match section.algebra {
        AlgebraKind::Full => {
            if !section.generators.is_empty() {
                return Err(config_err("`generators` applies only with algebra = \"generated\""));
            }
            MatrixAlgebra::full(section.dim.unwrap_or(rho.rows()))
        }
        AlgebraKind::Generated => {
            if section.generators.is_empty() {
                return Err(config_err("algebra = \"generated\" needs `generators`"));
            }
            close_algebra(&ctx.loaded.matrices(&section.generators)?, ctx.tol)?
        }
    };
    let omega = StateFunctional::from_density(Arc::new(algebra), &rho, ctx.tol)?;
    let rep = gns_construct(&omega, ctx.tol)?;
    ctx.report("gns", rep.summary(ctx.tol))
}
