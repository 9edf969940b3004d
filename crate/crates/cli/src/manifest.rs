//! `manifest.json`: what was run, with which settings, on which inputs, and
//! digests of everything written.

use crate::io::write_json;
use anyhow::{Context, Result};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub struct Manifest {
    command: &'static str,
    started: Instant,
    config: BTreeMap<String, String>,
    seeds: Vec<serde_json::Value>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(command: &'static str, config: BTreeMap<String, String>, started: Instant) -> Self {
        Self {
            command,
            started,
            config,
            seeds: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn seed(&mut self, seed: serde_json::Value) {
        self.seeds.push(seed);
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    fn digests(paths: &[PathBuf]) -> Result<Vec<serde_json::Value>> {
        paths
            .iter()
            .map(|p| Ok(json!({ "path": p.display().to_string(), "sha256": sha256_file(p)? })))
            .collect()
    }

    pub fn write(self, dir: &Path) -> Result<()> {
        let value = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.config,
            "seeds": self.seeds,
            "inputs": Self::digests(&self.inputs)?,
            "outputs": Self::digests(&self.outputs)?,
            "duration_seconds": self.started.elapsed().as_secs_f64(),
        });
        write_json(&dir.join("manifest.json"), &value)
    }
}
