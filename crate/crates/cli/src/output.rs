//! File I/O helpers and the per-directory run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
/// Bumped whenever the layout of an output directory changes.
pub const LAYOUT_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))
}

/// Output directory, created on demand.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(path: Option<&Path>) -> Result<Self, CliError> {
        let root = path
            .ok_or_else(|| CliError::invalid("--out is required for this command"))?
            .to_path_buf();
        fs::create_dir_all(&root)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self { root })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", parent.display())))?;
        }
        fs::write(&path, bytes)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub name: String,
    pub sha256: String,
}

/// Provenance of an output directory. Contains nothing that varies between
/// identical runs except measured timings, which only `bench` records.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub engine: &'static str,
    pub engine_version: &'static str,
    pub layout_version: u32,
    pub command: &'static str,
    pub seed: u64,
    pub config_sha256: String,
    pub config: Value,
    pub inputs: Vec<InputRecord>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurements: Option<Value>,
}

impl Manifest {
    pub fn new(command: &'static str, seed: u64, config: Value) -> Self {
        let canonical = serde_json::to_string(&config).expect("json value serializes");
        Self {
            engine: "vcount",
            engine_version: env!("CARGO_PKG_VERSION"),
            layout_version: LAYOUT_VERSION,
            command,
            seed,
            config_sha256: sha256_hex(canonical.as_bytes()),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            measurements: None,
        }
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        self.inputs.push(InputRecord {
            name,
            sha256: sha256_hex(bytes),
        });
    }

    pub fn write(mut self, out: &OutDir, outputs: &[String]) -> Result<(), CliError> {
        self.outputs = outputs.to_vec();
        let mut text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        text.push('\n');
        out.write(MANIFEST_FILE, text.as_bytes())
    }
}
