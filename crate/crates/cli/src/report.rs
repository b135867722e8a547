//! The report envelope and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::commands::Command;
use crate::config::Settings;
use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Wall-clock milliseconds; kept in their own section so that everything
/// else is reproducible byte for byte.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Timings {
    pub parse_ms: f64,
    pub compute_ms: f64,
}

#[derive(Serialize)]
struct CommandEcho<'a> {
    name: &'a str,
    settings: &'a Settings,
}

#[derive(Serialize)]
struct Report<'a> {
    schema_version: &'static str,
    command: CommandEcho<'a>,
    tool_version: &'static str,
    status: &'a str,
    results: &'a Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<Timings>,
}

/// Pretty JSON with 17 significant digits for every float.
pub fn render(cmd: Command, settings: &Settings, status: &str, results: &Value, timings: Option<Timings>) -> String {
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: CommandEcho {
            name: cmd.name(),
            settings,
        },
        tool_version: TOOL_VERSION,
        status,
        results,
        timings,
    };
    let mut text = hilbund::json::to_string_pretty(&report).expect("reports serialize");
    text.push('\n');
    text
}

/// Writes via a temporary file in the target directory and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| CliError::Failure(format!("writing {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.flush().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
