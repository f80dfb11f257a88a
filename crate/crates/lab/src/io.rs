//! Output files: little-endian binary fields with JSON sidecars, CSV tables
//! and the run manifest.

use crate::error::LabError;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskEntry {
    pub name: String,
    pub status: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub tasks: Vec<TaskEntry>,
    pub files: Vec<FileEntry>,
}

/// Writes into one directory and remembers every file for the manifest.
pub struct OutputDir {
    root: PathBuf,
    pub manifest: RunManifest,
}

impl OutputDir {
    pub fn create(root: &Path, command: &str, config_sha256: String, seed: u64, threads: usize) -> Result<Self, LabError> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                config_sha256,
                seed,
                threads,
                tasks: Vec::new(),
                files: Vec::new(),
            },
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), LabError> {
        fs::write(self.root.join(name), bytes)?;
        self.manifest.files.retain(|f| f.path != name);
        self.manifest.files.push(FileEntry { path: name.into(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), LabError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// CSV with a header row; `.` decimals regardless of locale.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), LabError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::Io(e.into_error()))?;
        self.write(name, &bytes)
    }

    /// Raw little-endian values plus `<name>.json` describing them.
    pub fn write_field<M: Serialize>(&mut self, name: &str, values: &[f64], meta: &M) -> Result<(), LabError> {
        let mut bytes = Vec::with_capacity(values.len() * 8);
        for v in values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        self.write(&format!("{name}.bin"), &bytes)?;
        self.write_json(&format!("{name}.json"), meta)
    }

    /// Runs `f` as a named task and records its status and wall-clock time.
    pub fn task<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T, LabError>) -> Result<T, LabError> {
        let start = Instant::now();
        let out = f(self);
        let status = match &out {
            Ok(_) => "ok".to_string(),
            Err(e) => format!("failed: {e}"),
        };
        self.manifest.tasks.push(TaskEntry { name: name.into(), status, seconds: start.elapsed().as_secs_f64() });
        out
    }

    /// The manifest lists itself last, without a checksum.
    pub fn finish(mut self) -> Result<RunManifest, LabError> {
        self.manifest.files.sort_by(|a, b| a.path.cmp(&b.path));
        let text = serde_json::to_string_pretty(&self.manifest)? + "\n";
        fs::write(self.root.join("manifest.json"), text)?;
        Ok(self.manifest)
    }
}

/// Sidecar of a binary field.
#[derive(Debug, Clone, Serialize)]
pub struct FieldMeta {
    pub dtype: &'static str,
    /// Slowest axis first.
    pub shape: Vec<usize>,
    pub axes: Vec<&'static str>,
    pub extent: Vec<[f64; 2]>,
    pub description: String,
}

/// Shortest round-trip formatting.
pub fn num(v: f64) -> String {
    format!("{v}")
}
