//! Output-directory handling: atomic file writes and run manifests.
//!
//! Every file lands via write-to-temp + rename in its final directory, so a
//! failed stage never leaves a partial artifact behind.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use qsr_core::risk::McConfig;
use qsr_core::synthgen::GenConfig;

use crate::commands::CliError;

pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// Atomically write one file under the output root. `rel` may contain
    /// subdirectories (created on demand).
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(rel);
        let dir = path
            .parent()
            .ok_or_else(|| CliError::input(format!("bad output path {rel}")))?;
        std::fs::create_dir_all(dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(bytes)?;
        tmp.persist(&path).map_err(|e| CliError::from(e.error))?;
        self.written.push(rel.to_string());
        Ok(())
    }

    /// Relative paths written so far, sorted.
    pub fn outputs(&self) -> Vec<String> {
        let mut v = self.written.clone();
        v.sort();
        v
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)?;
    Ok(hex(&Sha256::digest(&bytes)))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// How the portfolio entered the run.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PortfolioSource {
    Generated { config: GenConfig },
    Ingested { inputs: BTreeMap<String, String> },
}

/// Manifest of one pipeline run: replaying the recorded command with the
/// recorded config and seed reproduces every output byte for byte (the
/// timestamp aside).
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub workers: usize,
    pub mc: McConfig,
    pub percentiles: Vec<f64>,
    pub quotas: Vec<f64>,
    pub source: PortfolioSource,
    pub outputs: Vec<String>,
    /// Unix epoch seconds at completion; excluded from determinism
    /// comparisons.
    pub timestamp: u64,
}

pub fn now_epoch_seconds() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Pretty JSON with a trailing newline; struct field order is fixed by
/// declaration, map keys sort, so output is byte-stable.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}
