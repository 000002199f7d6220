//! Run manifest: input digests, per-stage parameters and timing, output
//! digests, and a combined tree digest. Two runs with the same inputs,
//! config, and seeds produce byte-identical output trees, which shows up
//! here as equal `outputs` maps and `tree_digest` values (`created_utc` and
//! the wall-clock figures are informational and excluded from that
//! contract).

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub params: serde_json::Value,
    pub wall_clock_ms: u64,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub created_utc: String,
    pub seed: u64,
    pub config_digest: String,
    /// Absolute input path -> sha256.
    pub inputs: BTreeMap<String, String>,
    pub stages: Vec<StageRecord>,
    /// Output path relative to the run directory -> sha256.
    pub outputs: BTreeMap<String, String>,
    /// Digest over the sorted (path, digest) pairs above.
    pub tree_digest: String,
}

impl RunManifest {
    pub fn tree_digest_of(outputs: &BTreeMap<String, String>) -> String {
        let mut hasher = Sha256::new();
        for (path, digest) in outputs {
            hasher.update(path.as_bytes());
            hasher.update([0u8]);
            hasher.update(digest.as_bytes());
            hasher.update([b'\n']);
        }
        hex::encode(hasher.finalize())
    }
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(sha256_bytes(&bytes))
}

/// Writes one output file under the run directory and records its digest.
pub fn write_output(
    out_dir: &Path,
    relpath: &str,
    contents: &[u8],
    outputs: &mut BTreeMap<String, String>,
    stage_outputs: &mut Vec<String>,
) -> Result<()> {
    let path = out_dir.join(relpath);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))?;
    }
    std::fs::write(&path, contents)
        .with_context(|| format!("cannot write {}", path.display()))?;
    outputs.insert(relpath.to_string(), sha256_bytes(contents));
    stage_outputs.push(relpath.to_string());
    Ok(())
}

/// Records every file in a directory tree (already on disk) as stage outputs.
pub fn record_tree(
    out_dir: &Path,
    rel_root: &str,
    outputs: &mut BTreeMap<String, String>,
    stage_outputs: &mut Vec<String>,
) -> Result<()> {
    let root = out_dir.join(rel_root);
    let mut stack = vec![root.clone()];
    let mut files = Vec::new();
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir)
            .with_context(|| format!("cannot list {}", dir.display()))?
        {
            let entry = entry?;
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.push(path);
            }
        }
    }
    files.sort();
    for path in files {
        let rel = path
            .strip_prefix(out_dir)
            .expect("path under out_dir")
            .to_string_lossy()
            .replace('\\', "/");
        outputs.insert(rel.clone(), sha256_file(&path)?);
        stage_outputs.push(rel);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_digest_depends_on_content_and_paths() {
        let mut a = BTreeMap::new();
        a.insert("x.csv".to_string(), "abc".to_string());
        a.insert("y.csv".to_string(), "def".to_string());
        let mut b = a.clone();
        assert_eq!(RunManifest::tree_digest_of(&a), RunManifest::tree_digest_of(&b));
        b.insert("y.csv".to_string(), "eee".to_string());
        assert_ne!(RunManifest::tree_digest_of(&a), RunManifest::tree_digest_of(&b));
    }

    #[test]
    fn write_output_records_digest() {
        let dir = tempfile::tempdir().unwrap();
        let mut outputs = BTreeMap::new();
        let mut stage = Vec::new();
        write_output(dir.path(), "sub/file.txt", b"hello", &mut outputs, &mut stage).unwrap();
        assert_eq!(stage, vec!["sub/file.txt"]);
        assert_eq!(outputs["sub/file.txt"], sha256_bytes(b"hello"));
        assert_eq!(std::fs::read(dir.path().join("sub/file.txt")).unwrap(), b"hello");
    }
}
