//! Header metadata stamped on every output file.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "setcp";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    /// `config` is any canonical text rendering of the producing configuration.
    pub fn new(config: &str, seed: u64) -> Self {
        Self {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            config_hash: config_hash(config),
            seed,
        }
    }

    /// `# tool=setcp version=0.1.0 config_hash=... seed=7`
    pub fn comment_line(&self) -> String {
        format!(
            "# tool={} version={} config_hash={} seed={}",
            self.tool, self.version, self.config_hash, self.seed
        )
    }
}

/// First 16 hex digits of the SHA-256 of `config`.
pub fn config_hash(config: &str) -> String {
    Sha256::digest(config.as_bytes())
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}
