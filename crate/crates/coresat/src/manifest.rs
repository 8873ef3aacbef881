use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Record of one invocation: what was read, how long each stage took and
/// what was written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub command: String,
    pub config: PipelineConfig,
    pub inputs: Vec<InputFile>,
    pub stages: Vec<StageTiming>,
    pub artifacts: Vec<Artifact>,
}

impl RunManifest {
    pub fn new(command: &str, config: PipelineConfig) -> Self {
        Self {
            tool: format!("coresat {}", env!("CARGO_PKG_VERSION")),
            command: command.to_owned(),
            config,
            inputs: Vec::new(),
            stages: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        let path = path.display().to_string();
        if !self.inputs.iter().any(|i| i.path == path) {
            self.inputs.push(InputFile {
                path,
                sha256: sha256_hex(bytes),
            });
        }
    }

    pub fn record_artifact(&mut self, name: &str, bytes: &[u8]) {
        let entry = Artifact {
            path: name.to_owned(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        };
        match self.artifacts.iter_mut().find(|a| a.path == name) {
            Some(a) => *a = entry,
            None => self.artifacts.push(entry),
        }
    }
}
