//! Run manifests: what ran, with which config, and a hash of every file it wrote.

use std::path::{Path, PathBuf};
use std::time::Instant;

use olu::io::{csv_bytes, write_bytes};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub artifacts: Vec<ArtifactRecord>,
    pub duration_secs: f64,
    pub version: String,
    /// Derived settings worth recording, e.g. γ→α conversions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes files under one directory and remembers their hashes.
pub struct ArtifactWriter {
    root: PathBuf,
    records: Vec<ArtifactRecord>,
    started: Instant,
}

impl ArtifactWriter {
    pub fn new(root: impl Into<PathBuf>) -> CliResult<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self { root, records: Vec::new(), started: Instant::now() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn bytes(&mut self, rel: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.root.join(rel);
        write_bytes(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.records.retain(|r| r.path != rel);
        self.records.push(ArtifactRecord { path: rel.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(path)
    }

    pub fn csv<T: Serialize>(&mut self, rel: &str, schema: &str, rows: &[T]) -> CliResult<PathBuf> {
        let bytes = csv_bytes(schema, rows)?;
        self.bytes(rel, &bytes)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, rel: &str, value: &T) -> CliResult<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        bytes.push(b'\n');
        self.bytes(rel, &bytes)
    }

    pub fn text(&mut self, rel: &str, text: &str) -> CliResult<PathBuf> {
        self.bytes(rel, text.as_bytes())
    }

    pub fn records(&self) -> &[ArtifactRecord] {
        &self.records
    }

    /// Writes `manifest.json` (not itself listed) and returns it.
    pub fn finish<C: Serialize>(
        mut self,
        command: &str,
        config: &C,
        seeds: Vec<u64>,
        notes: Vec<String>,
    ) -> CliResult<RunManifest> {
        self.records.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = RunManifest {
            command: command.to_string(),
            config: serde_json::to_value(config).map_err(|e| CliError::Io(e.to_string()))?,
            seeds,
            artifacts: self.records,
            duration_secs: self.started.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            notes,
        };
        let path = self.root.join(MANIFEST_FILE);
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        bytes.push(b'\n');
        write_bytes(&path, &bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(manifest)
    }
}

/// Re-hashes every listed artifact; returns the paths whose bytes changed.
pub fn verify_artifacts(root: &Path, manifest: &RunManifest) -> CliResult<Vec<String>> {
    let mut changed = Vec::new();
    for rec in &manifest.artifacts {
        let bytes = std::fs::read(root.join(&rec.path))?;
        if sha256_hex(&bytes) != rec.sha256 {
            changed.push(rec.path.clone());
        }
    }
    Ok(changed)
}
