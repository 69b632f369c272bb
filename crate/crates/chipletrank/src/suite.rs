//! Suite manifests: a named set of system files with a train/test split.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{parse_system, ChipletSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    pub id: String,
    /// System file path, relative to the suite file's directory.
    pub system: PathBuf,
    pub split: Split,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    pub systems: Vec<SuiteEntry>,
}

/// A suite entry with its system parsed and validated.
#[derive(Debug, Clone)]
pub struct LoadedEntry {
    pub id: String,
    pub split: Split,
    pub path: PathBuf,
    pub system: ChipletSystem,
}

/// Load a suite manifest and every system it references.
pub fn load_suite(path: impl AsRef<Path>) -> Result<Vec<LoadedEntry>> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let suite: Suite = serde_json::from_str(&text).map_err(|e| Error::MalformedFile {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    if suite.systems.is_empty() {
        return Err(Error::MalformedFile {
            path: path.display().to_string(),
            reason: "suite lists no systems".into(),
        });
    }
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut seen = std::collections::HashSet::new();
    let mut entries = Vec::with_capacity(suite.systems.len());
    for entry in suite.systems {
        if !seen.insert(entry.id.clone()) {
            return Err(Error::MalformedFile {
                path: path.display().to_string(),
                reason: format!("duplicate system id {:?}", entry.id),
            });
        }
        if entry.id.contains(',') {
            return Err(Error::MalformedFile {
                path: path.display().to_string(),
                reason: format!("system id {:?} contains a comma", entry.id),
            });
        }
        let system_path = base.join(&entry.system);
        let system = parse_system(&system_path)?;
        entries.push(LoadedEntry {
            id: entry.id,
            split: entry.split,
            path: system_path,
            system,
        });
    }
    Ok(entries)
}
