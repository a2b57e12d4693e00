use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use wta_core::Error;

use crate::commands::Command;

/// Record of one invocation, written beside its outputs. Holds no clock
/// readings, so a replay writes the same bytes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub root_seed: Option<u64>,
    pub invocation: Command,
    /// Relative to the manifest's directory.
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub const FILE: &'static str = "manifest.json";

    pub fn new(command: &Command, root_seed: Option<u64>, outputs: Vec<String>) -> Self {
        Self {
            command: command.name().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            root_seed,
            invocation: command.clone(),
            outputs: outputs.into_iter().map(PathBuf::from).collect(),
        }
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())).into())
    }
}
