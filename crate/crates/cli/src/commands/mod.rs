pub mod frontier_cmd;
pub mod reproduce;
pub mod simulate;
pub mod solve;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use leverage_control::{Error, Result};

use crate::config::RunConfig;

/// Load the JSON configuration, or fall back to the reference baseline.
pub fn load_config(path: Option<&PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", p.display())))
        }
        None => Ok(RunConfig::reference_default()),
    }
}

pub fn config_json(cfg: &RunConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

pub fn manifest_io(err: std::io::Error) -> Error {
    Error::InvalidConfig(format!("output write failed: {err}"))
}

pub fn ok() -> Result<ExitCode> {
    Ok(ExitCode::SUCCESS)
}

pub fn path_opt(p: &Option<PathBuf>) -> Option<&Path> {
    p.as_deref()
}
