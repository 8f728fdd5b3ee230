//! Run manifests written next to every output.

use std::path::Path;

use anyhow::Result;
use serde::{Deserialize, Serialize};

use crate::output::write_json;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to rerun a subcommand. `duration_secs` is the only
/// field that differs between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub seed: u64,
    pub parameters: serde_json::Value,
    /// Output files relative to the output directory, in write order.
    pub outputs: Vec<String>,
    /// Command-specific results (summary statistics, flags per sample).
    pub results: serde_json::Value,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: u64, parameters: serde_json::Value) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            parameters,
            outputs: Vec::new(),
            results: serde_json::Value::Null,
            duration_secs: 0.0,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(MANIFEST_FILE), self)
    }
}
