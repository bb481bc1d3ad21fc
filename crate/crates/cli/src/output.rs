use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Envelope written for every command.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: &'static str,
    /// Resolved parameters, flags and config file merged.
    pub config: Map<String, Value>,
    /// Seconds since the Unix epoch; the only nondeterministic field.
    pub timestamp: u64,
    pub pass: bool,
    pub result: Value,
}

/// Result body of `identities`: one verdict per suite and their conjunction.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub runs: Vec<RunVerdict>,
    pub aggregate_pass: bool,
}

#[derive(Debug, Serialize)]
pub struct RunVerdict {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

impl RunManifest {
    pub fn new(runs: Vec<RunVerdict>) -> Self {
        let aggregate_pass = runs.iter().all(|r| r.pass);
        Self { runs, aggregate_pass }
    }
}

impl Report {
    pub fn new(command: &'static str, config: Map<String, Value>, pass: bool, result: Value) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            timestamp,
            pass,
            result,
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Io(e.to_string()))
}

/// Writes `text` to `dir/name`, creating `dir` if needed.
pub fn write_into(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}
