//! Output manifests: every generated artifact is recorded with its hash
//! so a run can be verified byte-for-byte.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hoplink_core::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub command: String,
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
    pub records: usize,
}

pub fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

impl Manifest {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        Manifest {
            version: MANIFEST_VERSION,
            command: command.into(),
            seed,
            files: Vec::new(),
        }
    }

    pub fn add_file(&mut self, dir: &Path, name: &str, records: usize) -> Result<()> {
        self.files.push(ManifestEntry {
            path: name.to_owned(),
            sha256: sha256_hex(&dir.join(name))?,
            records,
        });
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)
            .map_err(|e| Error::format("manifest", e.to_string()))?;
        bytes.push(b'\n');
        std::fs::write(dir.join("manifest.json"), bytes)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_for_fixed_content() {
        let dir = std::env::temp_dir().join(format!("hoplink-manifest-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.txt");
        std::fs::write(&path, b"abc").unwrap();
        let h = sha256_hex(&path).unwrap();
        assert_eq!(
            h,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
