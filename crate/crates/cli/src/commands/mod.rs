mod dynamics;
mod gns;
mod metric;
mod nosignal;
mod partition;
mod tomo;

use serde::Serialize;

pub use dynamics::run as dynamics;
pub use gns::run as gns;
pub use metric::run as metric;
pub use nosignal::run as nosignal;
pub use partition::run as partition;
pub use tomo::{reconstruct as tomo_reconstruct, simulate as tomo_simulate};

use crate::config::Loaded;
use crate::error::{config_err, CliResult};
use crate::output::{to_json, Report};

/// Resolved configuration with command-line overrides applied.
pub struct Ctx {
    pub loaded: Loaded,
    pub seed: Option<u64>,
    pub tol: f64,
}

/// Text to emit and the exit status that goes with it.
pub struct Outcome {
    pub text: String,
    pub exit: i32,
}

impl Ctx {
    pub fn require_seed(&self) -> CliResult<u64> {
        self.seed.ok_or_else(|| config_err("this command needs an explicit seed (`seed` in the config or --seed)"))
    }

    fn section<'a, S>(&self, s: &'a Option<S>, name: &str) -> CliResult<&'a S> {
        s.as_ref().ok_or_else(|| config_err(format!("missing [{name}] section")))
    }

    fn report<R: Serialize>(&self, command: &str, result: R) -> CliResult<Outcome> {
        let report = Report {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: &self.loaded.sha256,
            seed: self.seed,
            tol: self.tol,
            result,
        };
        Ok(Outcome { text: to_json(&report)?, exit: 0 })
    }
}
