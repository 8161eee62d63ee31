//! Output directory bookkeeping: every written file is hashed into the manifest.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
    pub timings: BTreeMap<String, f64>,
    pub reports: BTreeMap<String, Value>,
    pub files: Vec<FileEntry>,
}

/// Collects outputs of one run below `dir`.
pub struct RunOutput {
    dir: PathBuf,
    started: Instant,
    pub manifest: RunManifest,
}

impl RunOutput {
    pub fn create(dir: &Path, command: &str, seed: u64, config: Option<Value>) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(RunOutput {
            dir: dir.to_path_buf(),
            started: Instant::now(),
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                seed,
                threads: rayon::current_num_threads(),
                config,
                timings: BTreeMap::new(),
                reports: BTreeMap::new(),
                files: Vec::new(),
            },
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        self.manifest.files.push(FileEntry {
            path: name.into(),
            sha256: hex::encode(Sha256::digest(contents.as_bytes())),
            bytes: contents.len(),
        });
        Ok(())
    }

    pub fn write_json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
        self.write(name, &text)
    }

    pub fn report<S: Serialize>(&mut self, key: &str, value: &S) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.manifest.reports.insert(key.into(), v);
    }

    pub fn lap(&mut self, stage: &str) {
        self.manifest
            .timings
            .insert(stage.into(), self.started.elapsed().as_secs_f64());
    }

    pub fn finish(mut self) -> Result<RunManifest, CliError> {
        self.lap("total");
        let text = serde_json::to_string_pretty(&self.manifest).map_err(|e| CliError::Config(e.to_string()))?;
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(self.manifest)
    }
}
