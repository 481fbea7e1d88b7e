//! Run manifest: every command records what it ran and what it wrote,
//! with content hashes, so outputs can be reproduced and verified.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub duration_secs: f64,
    pub outputs: Vec<OutputEntry>,
}

pub struct ManifestBuilder {
    command: String,
    config_path: Option<String>,
    config: serde_json::Value,
    seed: Option<u64>,
    started: Instant,
    out_dir: PathBuf,
    outputs: Vec<OutputEntry>,
}

impl ManifestBuilder {
    pub fn new(
        command: &str,
        config_path: Option<&Path>,
        config: serde_json::Value,
        seed: Option<u64>,
        out_dir: &Path,
    ) -> std::io::Result<Self> {
        fs::create_dir_all(out_dir)?;
        Ok(ManifestBuilder {
            command: command.to_string(),
            config_path: config_path.map(|p| p.display().to_string()),
            config,
            seed,
            started: Instant::now(),
            out_dir: out_dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    /// Write a file into the output directory and record its hash.
    pub fn write(&mut self, name: &str, contents: &str) -> std::io::Result<PathBuf> {
        let path = self.out_dir.join(name);
        fs::write(&path, contents)?;
        let mut hasher = Sha256::new();
        hasher.update(contents.as_bytes());
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.outputs.push(OutputEntry {
            path: path.display().to_string(),
            sha256: hex,
        });
        Ok(path)
    }

    /// Finalize and write `manifest.json`.
    pub fn finish(self) -> std::io::Result<PathBuf> {
        let manifest = RunManifest {
            command: self.command,
            config_path: self.config_path,
            config: self.config,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_secs: self.started.elapsed().as_secs_f64(),
            outputs: self.outputs,
        };
        let path = self.out_dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap())?;
        Ok(path)
    }
}
