//! Output directory bookkeeping and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use morphboat_core::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Overrides, RunConfig};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_paths: Vec<PathBuf>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub overrides: Overrides,
    pub effective_config: RunConfig,
    /// Checksums of imported files read by the run.
    pub inputs: Vec<Artifact>,
    pub artifacts: Vec<Artifact>,
    /// `success`, or the domain failure that ended the run.
    pub outcome: String,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))
    }

    /// Artifacts whose checksum differs from `other`, or that either side lacks.
    pub fn differences(&self, other: &RunManifest) -> Vec<String> {
        let mut out = Vec::new();
        for a in &self.artifacts {
            match other.artifacts.iter().find(|b| b.path == a.path) {
                Some(b) if b.sha256 == a.sha256 => {}
                Some(_) => out.push(format!("{} differs", a.path)),
                None => out.push(format!("{} missing from rerun", a.path)),
            }
        }
        for b in &other.artifacts {
            if !self.artifacts.iter().any(|a| a.path == b.path) {
                out.push(format!("{} only in rerun", b.path));
            }
        }
        out
    }
}

pub fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn checksum_file(path: &Path) -> Result<Artifact> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(Artifact {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

/// The output directory of one run; remembers every artifact written.
#[derive(Debug)]
pub struct Output {
    pub dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl Output {
    pub fn create(dir: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        Ok(Self {
            dir,
            artifacts: Vec::new(),
        })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(rel);
        write_atomic(&path, bytes)?;
        self.artifacts.retain(|a| a.path != rel);
        self.artifacts.push(Artifact {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(path)
    }

    pub fn write_str(&mut self, rel: &str, text: &str) -> Result<PathBuf> {
        self.write(rel, text.as_bytes())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<PathBuf> {
        let mut text =
            serde_json::to_string_pretty(value).map_err(|e| Error::Log(e.to_string()))?;
        text.push('\n');
        self.write_str(rel, &text)
    }

    /// Registers a file produced by another writer (plots).
    pub fn record(&mut self, rel: &str) -> Result<()> {
        let mut a = checksum_file(&self.path(rel))?;
        a.path = rel.to_string();
        self.artifacts.retain(|b| b.path != rel);
        self.artifacts.push(a);
        Ok(())
    }

    pub fn artifacts(&self) -> Vec<Artifact> {
        let mut v = self.artifacts.clone();
        v.sort_by(|a, b| a.path.cmp(&b.path));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path().join("a")).unwrap().count(), 1);
    }

    #[test]
    fn output_tracks_checksums() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Output::create(dir.path().to_path_buf()).unwrap();
        out.write_str("x.txt", "abc").unwrap();
        let a = &out.artifacts()[0];
        assert_eq!(
            a.sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(a.bytes, 3);
    }

    #[test]
    fn differences_name_the_files() {
        let art = |p: &str, h: &str| Artifact {
            path: p.into(),
            sha256: h.into(),
            bytes: 0,
        };
        let base = RunManifest {
            tool_version: String::new(),
            command: "dock".into(),
            config_paths: vec![],
            seed: 0,
            out_dir: PathBuf::new(),
            overrides: Overrides::default(),
            effective_config: RunConfig::default(),
            inputs: vec![],
            artifacts: vec![art("a", "1"), art("b", "2")],
            outcome: "success".into(),
        };
        let mut other = base.clone();
        other.artifacts = vec![art("a", "1"), art("b", "3"), art("c", "4")];
        assert_eq!(other.differences(&other), Vec::<String>::new());
        assert_eq!(
            base.differences(&other),
            vec!["b differs", "c only in rerun"]
        );
    }
}
