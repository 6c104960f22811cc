//! Output helpers: deterministic text files plus the resolved-config
//! snapshot.
//!
//! Primary data files carry no timestamps, so identical config and seed
//! reproduce them byte for byte; the wall-clock stamp lives only in the
//! snapshot header comment.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::RunConfig;

pub fn write_text(dir: &Path, name: &str, content: &str) -> std::io::Result<()> {
    std::fs::write(dir.join(name), content)
}

pub fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    std::fs::write(dir.join(name), text + "\n")
}

/// Resolved-config snapshot: a valid config file with a commented header.
pub fn write_snapshot(dir: &Path, command: &str, config: &RunConfig) -> std::io::Result<()> {
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut out = String::new();
    out.push_str(&format!("# written_unix={stamp}\n# command={command}\n"));
    out.push_str(&config.to_toml());
    std::fs::write(dir.join("config_snapshot.toml"), out)
}
