//! Provenance record written beside every output.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::{Classify, Outcome};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Outcome<Self> {
        let bytes = std::fs::read(path).or_input(format!("cannot read {}", path.display()))?;
        Ok(Self {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

/// Fields that legitimately differ between otherwise identical runs.
#[derive(Debug, Serialize)]
pub struct Volatile {
    pub unix_time_seconds: u64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config: serde_json::Map<String, serde_json::Value>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub volatile: Volatile,
}

impl RunManifest {
    pub fn new(command: &'static str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: None,
            config: serde_json::Map::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            volatile: Volatile {
                unix_time_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            },
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) -> Outcome {
        let value = serde_json::to_value(value).or_internal(format!("cannot record {key}"))?;
        self.config.insert(key.to_string(), value);
        Ok(())
    }

    pub fn input(&mut self, path: &Path) -> Outcome {
        self.inputs.push(FileDigest::of(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> Outcome {
        self.outputs.push(FileDigest::of(path)?);
        Ok(())
    }

    /// Writes the manifest to `path` and returns it.
    pub fn write(&self, path: PathBuf) -> Outcome<PathBuf> {
        let mut json = serde_json::to_string_pretty(self).or_internal("cannot serialize run manifest")?;
        json.push('\n');
        std::fs::write(&path, json).or_input(format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}

/// `<output>.manifest.json` for file outputs.
pub fn beside(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
