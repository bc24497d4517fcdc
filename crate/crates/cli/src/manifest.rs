use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// Reproducibility stamp written into every output directory.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub command_line: Vec<String>,
    pub config_file: Option<String>,
    pub config: BTreeMap<String, String>,
    pub settings: serde_json::Value,
    pub seed: Option<u64>,
    pub extractor: Option<String>,
    pub jobs: usize,
    pub inputs: Vec<InputDigest>,
    pub started_at: String,
    pub finished_at: String,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> anyhow::Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// SHA-256 of a file, or of a directory tree (relative names and contents,
/// in sorted order). The run manifest itself is left out.
pub fn digest(path: &Path) -> anyhow::Result<String> {
    let mut h = Sha256::new();
    if path.is_dir() {
        let mut files = Vec::new();
        collect(path, path, &mut files)?;
        files.sort();
        for rel in files {
            h.update(rel.as_bytes());
            h.update([0]);
            h.update(std::fs::read(path.join(&rel)).with_context(|| format!("reading {rel}"))?);
        }
    } else {
        h.update(std::fs::read(path).with_context(|| format!("reading {}", path.display()))?);
    }
    Ok(hex::encode(h.finalize()))
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<String>) -> anyhow::Result<()> {
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let p = entry?.path();
        if p.is_dir() {
            collect(root, &p, out)?;
        } else if p.file_name().is_some_and(|n| n != MANIFEST_FILE) {
            let rel = p.strip_prefix(root).unwrap_or(&p);
            out.push(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_digest_matches_known_value() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        std::fs::write(&p, "abc").unwrap();
        assert_eq!(
            digest(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn dir_digest_ignores_manifest_and_order() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        std::fs::write(a.path().join("x"), "1").unwrap();
        std::fs::write(a.path().join("y"), "2").unwrap();
        std::fs::write(b.path().join("y"), "2").unwrap();
        std::fs::write(b.path().join("x"), "1").unwrap();
        std::fs::write(b.path().join(MANIFEST_FILE), "{}").unwrap();
        assert_eq!(digest(a.path()).unwrap(), digest(b.path()).unwrap());
    }
}
