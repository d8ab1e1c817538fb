//! Run manifest: the full normalized configuration, the seed list, and a
//! hash of the configuration block, so any output directory records exactly
//! what produced it and the config can be reconstructed from the manifest
//! alone.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::{from_key_values, ExperimentConfig, LoadError};

/// FNV-1a 64-bit hash; stable and dependency-free.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn config_block(config: &ExperimentConfig) -> String {
    let mut block = String::new();
    for (key, value) in config.to_key_values() {
        let _ = writeln!(block, "{key} = {value}");
    }
    block
}

pub fn render_manifest(config: &ExperimentConfig) -> String {
    let block = config_block(config);
    let mut out = String::new();
    let _ = writeln!(out, "# rer experiment manifest");
    let _ = writeln!(out, "format = 1");
    let _ = writeln!(out, "config_hash = {:016x}", fnv1a64(block.as_bytes()));
    let _ = writeln!(out, "seeds = {}", config.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
    let _ = writeln!(out, "[config]");
    out.push_str(&block);
    out
}

pub fn write_manifest(path: &Path, config: &ExperimentConfig) -> std::io::Result<()> {
    std::fs::write(path, render_manifest(config))
}

/// Reconstruct the config from a manifest, verifying the recorded hash.
pub fn read_manifest(path: &Path) -> Result<ExperimentConfig, LoadError> {
    let text = std::fs::read_to_string(path)?;
    let Some((header, block)) = text.split_once("[config]\n") else {
        return Err(LoadError::Parse { line: 0, message: "manifest has no [config] section".into() });
    };
    let mut pairs = Vec::new();
    for line in block.lines() {
        if let Some((key, value)) = line.split_once('=') {
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }
    }
    let config = from_key_values(&pairs)?;
    let recorded = header
        .lines()
        .find_map(|l| l.strip_prefix("config_hash = "))
        .ok_or_else(|| LoadError::Parse { line: 0, message: "manifest has no config_hash".into() })?;
    let actual = format!("{:016x}", fnv1a64(config_block(&config).as_bytes()));
    if recorded != actual {
        return Err(LoadError::Parse {
            line: 0,
            message: format!("config hash mismatch: manifest says {recorded}, config hashes to {actual}"),
        });
    }
    Ok(config)
}
