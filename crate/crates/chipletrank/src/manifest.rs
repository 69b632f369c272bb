//! Run manifests: provenance records written beside every output artifact.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    /// The invocation that produced the artifact.
    pub command: String,
    /// Digest of the resolved configuration.
    pub config_hash: String,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<InputDigest>,
    pub created_utc: String,
}

impl RunManifest {
    pub fn new(command: String, config: &impl Serialize) -> Self {
        let config_json =
            serde_json::to_string(config).expect("config serialization cannot fail");
        RunManifest {
            tool: "chipletrank",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_hash: hex_sha256(config_json.as_bytes()),
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            created_utc: chrono::Utc::now().to_rfc3339(),
        }
    }

    pub fn seed(mut self, name: &str, value: u64) -> Self {
        self.seeds.insert(name.to_string(), value);
        self
    }

    pub fn input(mut self, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes =
            std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex_sha256(&bytes),
        });
        Ok(self)
    }

    /// Write `<artifact>.manifest.json` next to the artifact.
    pub fn write_beside(&self, artifact: impl AsRef<Path>) -> Result<()> {
        let artifact = artifact.as_ref();
        let mut name = artifact.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        let path = artifact.with_file_name(name);
        let body = serde_json::to_string_pretty(self)
            .expect("manifest serialization cannot fail");
        std::fs::write(&path, body).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

pub fn hex_sha256(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
