use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to every command's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub tool_version: String,
    pub inputs: Vec<FileHash>,
    /// Paths relative to the manifest's directory.
    pub outputs: Vec<FileHash>,
    pub wall_clock_ms: u64,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Collects inputs and outputs while a command runs.
pub struct Recorder {
    out_dir: PathBuf,
    command: String,
    config: serde_json::Value,
    seeds: Vec<u64>,
    inputs: Vec<FileHash>,
    outputs: Vec<String>,
    started: Instant,
}

impl Recorder {
    pub fn new(out_dir: &Path, command: &str, config: serde_json::Value) -> Result<Self> {
        fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
        Ok(Recorder {
            out_dir: out_dir.to_path_buf(),
            command: command.to_string(),
            config,
            seeds: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    pub fn seed(&mut self, seed: u64) {
        self.seeds.push(seed);
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let sha256 = sha256_file(path)?;
        self.inputs.push(FileHash {
            path: path.display().to_string(),
            sha256,
        });
        Ok(())
    }

    /// Path for a new output file inside the output directory.
    pub fn output(&mut self, name: &str) -> PathBuf {
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
        self.out_dir.join(name)
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.output(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    pub fn finish(self) -> Result<RunManifest> {
        let outputs = self
            .outputs
            .iter()
            .map(|name| {
                Ok(FileHash {
                    path: name.clone(),
                    sha256: sha256_file(&self.out_dir.join(name))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let manifest = RunManifest {
            command: self.command,
            args: std::env::args().collect(),
            config: self.config,
            seeds: self.seeds,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: self.inputs,
            outputs,
            wall_clock_ms: self.started.elapsed().as_millis() as u64,
        };
        let path = self.out_dir.join(MANIFEST_FILE);
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(manifest)
    }
}

/// Files whose current hash differs from the manifest, or that are missing.
pub fn verify(dir: &Path) -> Result<Vec<String>> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let manifest: RunManifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut bad = Vec::new();
    for f in &manifest.outputs {
        match sha256_file(&dir.join(&f.path)) {
            Ok(h) if h == f.sha256 => {}
            Ok(_) => bad.push(format!("{}: hash mismatch", f.path)),
            Err(_) => bad.push(format!("{}: missing", f.path)),
        }
    }
    Ok(bad)
}
