//! Run manifests: one `manifest.txt` per output directory recording the
//! command, tool version, input hashes, and headline results. Reruns with
//! identical inputs produce identical manifests except for the timestamp
//! line.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub struct Manifest {
    command: String,
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), entries: Vec::new() }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn set_file_hash(&mut self, key: &str, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("hashing {} for the manifest", path.display()))?;
        let digest = Sha256::digest(&bytes);
        self.set(key, format!("sha256:{digest:x}"));
        Ok(())
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let mut text = String::new();
        let _ = writeln!(text, "sirmix-manifest v1");
        let _ = writeln!(text, "tool_version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(text, "command = {}", self.command);
        let _ = writeln!(text, "created_utc = {}", chrono::Utc::now().to_rfc3339());
        for (key, value) in &self.entries {
            let _ = writeln!(text, "{key} = {value}");
        }
        let path = out_dir.join("manifest.txt");
        std::fs::write(&path, text)
            .with_context(|| format!("writing manifest {}", path.display()))?;
        Ok(())
    }
}
