use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Provenance record written next to every output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub completed_cells: Vec<String>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: String, master_seed: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash,
            master_seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            completed_cells: Vec::new(),
            started_unix: now(),
            finished_unix: 0,
        }
    }

    pub fn finish(mut self, path: &Path) -> CliResult<()> {
        self.finished_unix = now();
        let mut text = serde_json::to_string_pretty(&self).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        write_file(path, text.as_bytes())
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Sidecar manifest path for a single-file output.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    path.with_file_name(name)
}

/// SHA-256 over the canonical JSON form of `value` (object keys sorted).
pub fn config_hash<T: Serialize>(value: &T) -> CliResult<String> {
    let canonical = serde_json::to_value(value).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(canonical.to_string().as_bytes())))
}

pub fn file_digest(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct A {
        x: u32,
        y: f64,
    }

    #[test]
    fn hash_tracks_semantic_fields() {
        let a = config_hash(&A { x: 1, y: 0.5 }).unwrap();
        assert_eq!(a, config_hash(&A { x: 1, y: 0.5 }).unwrap());
        assert_ne!(a, config_hash(&A { x: 2, y: 0.5 }).unwrap());
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar(Path::new("out/t.txt")), PathBuf::from("out/t.txt.manifest.json"));
    }
}
