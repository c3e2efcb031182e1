//! Per-run record of what was read, what was written and how.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path, data: &[u8]) -> Self {
        let hash = Sha256::digest(data);
        let sha256 = hash.iter().map(|b| format!("{b:02x}")).collect();
        Self { path: path.display().to_string(), bytes: data.len(), sha256 }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub arguments: Vec<String>,
    pub master_seed: Option<u64>,
    pub threads: usize,
    pub wall_clock_s: f64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Configuration after defaults and overrides were applied.
    pub config: toml::Table,
}

/// Reads a file and remembers its digest.
#[derive(Debug, Default)]
pub struct Inputs {
    pub files: Vec<FileDigest>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let data = std::fs::read(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        self.files.push(FileDigest::of(path, &data));
        Ok(data)
    }

    pub fn read_text(&mut self, path: &Path) -> Result<String> {
        let data = self.read(path)?;
        String::from_utf8(data).map_err(|e| CliError::Read {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        })
    }
}

/// Writes files into the output directory, one at a time.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    pub files: Vec<FileDigest>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, content).map_err(|source| CliError::Write { path: path.clone(), source })?;
        eprintln!("wrote {}", path.display());
        self.files.push(FileDigest::of(&path, content.as_bytes()));
        Ok(())
    }

    pub fn finish(mut self, mut manifest: RunManifest) -> Result<()> {
        manifest.outputs = std::mem::take(&mut self.files);
        let text = toml::to_string(&manifest);
        let path = self.dir.join(MANIFEST_FILE);
        let text = text.map_err(|e| CliError::Write { path: path.clone(), source: std::io::Error::other(e) })?;
        std::fs::write(&path, text).map_err(|source| CliError::Write { path: path.clone(), source })?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

pub fn to_table<T: Serialize>(value: &T) -> toml::Table {
    match toml::Table::try_from(value) {
        Ok(t) => t,
        Err(e) => {
            let mut t = toml::Table::new();
            t.insert("unserialisable".into(), toml::Value::String(e.to_string()));
            t
        }
    }
}
