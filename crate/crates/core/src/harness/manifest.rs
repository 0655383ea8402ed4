use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// What is needed to reproduce a run: seeds and content hashes of its inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seeds: Vec<u64>,
    pub config_sha256: String,
    pub corpus_sha256: String,
}

impl Manifest {
    pub fn new(command: &str, seeds: Vec<u64>, config_text: &str, corpus_text: &str) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seeds,
            config_sha256: sha256_hex(config_text.as_bytes()),
            corpus_sha256: sha256_hex(corpus_text.as_bytes()),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        let json = serde_json::to_string_pretty(self).expect("manifests always serialize") + "\n";
        std::fs::write(path, json).map_err(|e| HarnessError::io(path, e))
    }
}
