use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Envelope shared by every JSON report.
#[derive(Serialize)]
pub struct Report<'a, R: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub config_sha256: &'a str,
    pub seed: Option<u64>,
    pub tol: f64,
    pub result: R,
}

pub fn to_json<R: Serialize>(report: &R) -> CliResult<String> {
    let mut text =
        serde_json::to_string_pretty(report).map_err(|e| CliError::Config(format!("cannot serialise report: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Writes through a sibling temporary file so a failed run never leaves a
/// partial output behind.
pub fn write_atomic(path: &Path, text: &str) -> CliResult<()> {
    let werr = |source| CliError::Write { path: path.to_path_buf(), source };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.partial"));
    let mut f = fs::File::create(&tmp).map_err(werr)?;
    f.write_all(text.as_bytes()).map_err(werr)?;
    f.sync_all().map_err(werr)?;
    drop(f);
    fs::rename(&tmp, path).map_err(werr)
}
