use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Written next to every command's outputs. Re-running `command_line`
/// reproduces every artifact except this file byte for byte.
#[derive(Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub subcommand: String,
    pub seed: Option<u64>,
    pub parameters: Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
    pub version: &'static str,
}

static START: OnceLock<Instant> = OnceLock::new();

/// Records the process start; durations in manifests are measured from here.
pub fn mark_start() {
    START.get_or_init(Instant::now);
}

pub struct ManifestBuilder {
    subcommand: String,
    seed: Option<u64>,
    parameters: Value,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str, seed: Option<u64>, parameters: Value) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            seed,
            parameters,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    /// Writes `manifest.json` into `dir`.
    pub fn finish(self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let manifest = RunManifest {
            command_line: std::env::args().collect(),
            subcommand: self.subcommand,
            seed: self.seed,
            parameters: self.parameters,
            inputs: self.inputs,
            outputs: self.outputs,
            wall_clock_seconds: START.get_or_init(Instant::now).elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION"),
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&path, text + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
