//! Run manifests attached to every emitted artifact.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// SHA-256 over `blob <len>\0<canonical JSON>`; object keys are sorted, so
/// equal values always hash equally.
pub fn content_hash<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let canonical = serde_json::to_vec(&serde_json::to_value(value)?)?;
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", canonical.len()).as_bytes());
    h.update(&canonical);
    Ok(hex::encode(h.finalize()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub master_seed: u64,
    pub shots: Vec<u64>,
    pub models: Vec<String>,
    pub config_hash: String,
}

impl RunManifest {
    /// Manifest for `command` run with `config`; the hash covers the full
    /// configuration.
    pub fn new<T: Serialize + ?Sized>(
        command: &str,
        master_seed: u64,
        shots: Vec<u64>,
        models: Vec<String>,
        config: &T,
    ) -> Result<Self> {
        Ok(RunManifest {
            tool: "fockhtm".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            master_seed,
            shots,
            models,
            config_hash: content_hash(config)?,
        })
    }
}
