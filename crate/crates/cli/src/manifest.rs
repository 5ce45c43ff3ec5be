use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::Failure;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the fields that determine results. Output location, checkpoint
/// cadence and node budget are excluded so a checkpoint written under a
/// budget can be resumed without one.
pub fn problem_hash(c: &Config) -> String {
    let mut core = c.clone();
    core.output_dir = PathBuf::new();
    core.checkpoint_every = 1;
    core.node_budget = None;
    let text = serde_json::to_string(&core).expect("configs serialize");
    sha256_hex(text.as_bytes())
}

pub struct Manifest<'a> {
    pub command: &'a str,
    pub config: &'a Config,
    pub raw_config: &'a [u8],
    pub threads: usize,
    pub resumed_from: Option<&'a Path>,
    pub artifacts: &'a [PathBuf],
    pub runtime: Duration,
}

impl Manifest<'_> {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, Failure> {
        let finished = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let names: Vec<String> = self
            .artifacts
            .iter()
            .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
            .collect();
        let value: Value = json!({
            "tool": "orbitcount",
            "cli_version": env!("CARGO_PKG_VERSION"),
            "core_version": orbitcount_core::VERSION,
            "subcommand": self.command,
            "config_hash": sha256_hex(self.raw_config),
            "problem_hash": problem_hash(self.config),
            "config": self.config,
            "threads": self.threads,
            "resumed_from": self.resumed_from.map(|p| p.display().to_string()),
            "artifacts": names,
            "runtime_seconds": self.runtime.as_secs_f64(),
            "finished_unix": finished,
        });
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&value).expect("json") + "\n")?;
        Ok(path)
    }
}
