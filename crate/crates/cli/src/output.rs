//! Atomic file output, CSV float formatting, and the run manifest.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

/// 17 significant digits: round-trips every f64 and keeps diffs meaningful.
pub fn fmt_f64(x: f64) -> String {
    // Normalize negative zero so exported grids diff cleanly.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Write via a temp file in the same directory, then rename into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything needed to reproduce and audit one run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub wall_ms: f64,
    /// SHA-256 of every file emitted by the run, keyed by file name.
    pub files: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, config: BTreeMap<String, String>) -> Self {
        Self {
            tool: "koiso-cao".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            c0: None,
            beta: None,
            wall_ms: 0.0,
            files: BTreeMap::new(),
        }
    }
}

/// Collects emitted files and finalizes the manifest.
pub struct OutputDir {
    dir: PathBuf,
    manifest: RunManifest,
    started: std::time::Instant,
}

impl OutputDir {
    pub fn new(dir: &Path, command: &str, config: BTreeMap<String, String>) -> io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: RunManifest::new(command, config),
            started: std::time::Instant::now(),
        })
    }

    pub fn set_constants(&mut self, c0: f64, beta: Option<f64>) {
        self.manifest.c0 = Some(c0);
        self.manifest.beta = beta;
    }

    /// Write one output file atomically and record its checksum.
    pub fn emit(&mut self, name: &str, contents: &str) -> io::Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, contents.as_bytes())?;
        self.manifest
            .files
            .insert(name.into(), sha256_hex(contents.as_bytes()));
        Ok(path)
    }

    /// Write `manifest.json` and return its path.
    pub fn finish(mut self) -> io::Result<PathBuf> {
        self.manifest.wall_ms = self.started.elapsed().as_secs_f64() * 1e3;
        let json = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| io::Error::other(e.to_string()))?;
        let path = self.dir.join("manifest.json");
        write_atomic(&path, json.as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_round_trips() {
        for x in [3.1981649571095305, -0.5276195198969626, 1e-300] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
