//! Provenance record written next to every result directory.

use crate::commands::Outcome;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Seconds since the Unix epoch.
pub fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical JSON of every numeric input.
    pub config_hash: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    /// Relative to the output directory.
    pub outputs: Vec<PathBuf>,
}

pub fn hash_inputs(inputs: &serde_json::Value) -> String {
    let text = serde_json::to_string(inputs).expect("inputs serialize");
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl RunManifest {
    pub fn new(outcome: &Outcome, started_unix: f64, outputs: Vec<PathBuf>) -> Self {
        Self {
            command: outcome.command.clone(),
            config_hash: hash_inputs(&outcome.inputs),
            seed: outcome.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix,
            finished_unix: now(),
            outputs,
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(dir.join(MANIFEST_FILE), text + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn hash_depends_on_every_field() {
        let a = hash_inputs(&json!({"seed": 1, "paths": 10}));
        let b = hash_inputs(&json!({"seed": 2, "paths": 10}));
        assert_ne!(a, b);
        assert_eq!(a, hash_inputs(&json!({"paths": 10, "seed": 1})));
        assert_eq!(a.len(), 64);
    }
}
