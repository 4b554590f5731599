//! Run manifests: the audit record written beside every CLI output.
//!
//! A manifest snapshots the subcommand, resolved parameters, seed, tool
//! version, input fingerprints (SHA-256 of file contents), and output file
//! names. Paths are recorded as bare file names, so two runs with identical
//! inputs produce byte-identical manifests even in different directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const MANIFEST_VERSION: u32 = 1;

/// One input file: its name and content fingerprint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRecord {
    pub name: String,
    pub sha256: String,
}

/// The audit record for one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub tool_version: String,
    /// Subcommand path, e.g. "detect copytype fit".
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    /// Resolved non-path parameters, sorted by name.
    pub params: BTreeMap<String, String>,
    pub inputs: Vec<InputRecord>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            manifest_version: MANIFEST_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed: None,
            params: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// Record an input file: base name plus content hash.
    pub fn input(mut self, path: &Path) -> Result<Self> {
        let bytes = fs::read(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        self.inputs.push(InputRecord {
            name: file_name(path),
            sha256: format!("{:x}", hasher.finalize()),
        });
        Ok(self)
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(file_name(path));
        self
    }

    /// Write `<primary_output>.manifest.json` next to the primary output.
    pub fn write_beside(&self, primary_output: &Path) -> Result<()> {
        let mut path = primary_output.as_os_str().to_owned();
        path.push(".manifest.json");
        let json =
            serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(e.to_string()))?;
        fs::write(Path::new(&path), json + "\n")?;
        Ok(())
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string_lossy().into_owned())
}
