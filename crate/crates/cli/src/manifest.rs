//! Run manifest: configuration hash, crate version, wall time, and a content
//! hash for every output file. Partial outputs are removed when a run fails.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Serialize)]
struct OutputEntry {
    path: String,
    sha256: String,
    bytes: u64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_sha256: &'a str,
    version: &'a str,
    wall_time_seconds: f64,
    outputs: Vec<OutputEntry>,
}

/// Tracks files created during a run; on success writes `manifest.json`
/// next to them, on failure deletes everything it registered.
pub struct RunManifest {
    command: String,
    config_hash: String,
    started: Instant,
    files: Vec<PathBuf>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(command: &str, config_json: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            config_hash: sha256_hex(config_json.as_bytes()),
            started: Instant::now(),
            files: Vec::new(),
        }
    }

    /// Write an output file and register it.
    pub fn write(&mut self, path: &Path, contents: &[u8]) -> anyhow::Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, contents)?;
        self.files.push(path.to_path_buf());
        Ok(())
    }

    /// Remove every registered output (used on failure).
    pub fn discard(self) {
        for f in &self.files {
            let _ = std::fs::remove_file(f);
        }
    }

    /// Write `manifest.json` beside the outputs and return its path.
    pub fn finish(self, dir: &Path) -> anyhow::Result<PathBuf> {
        let outputs = self
            .files
            .iter()
            .map(|p| {
                let bytes = std::fs::read(p)?;
                Ok(OutputEntry {
                    path: p.display().to_string(),
                    sha256: sha256_hex(&bytes),
                    bytes: bytes.len() as u64,
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let manifest = Manifest {
            command: &self.command,
            config_sha256: &self.config_hash,
            version: env!("CARGO_PKG_VERSION"),
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            outputs,
        };
        std::fs::create_dir_all(dir)?;
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(path)
    }
}
