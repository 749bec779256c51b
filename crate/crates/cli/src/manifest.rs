use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const GIT_DESCRIBE: &str = env!("SOBOLEV_RICCI_GIT_DESCRIBE");

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<String>,
    pub wall_time_ms: f64,
    pub threads: usize,
    pub version: String,
    pub git_describe: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects inputs and outputs of one command run and writes the manifest
/// next to the outputs.
pub struct Run {
    command: String,
    parameters: Value,
    seed: Option<u64>,
    out_dir: PathBuf,
    inputs: Vec<InputHash>,
    outputs: Vec<String>,
    start: Instant,
}

impl Run {
    pub fn new(command: &str, parameters: &impl Serialize, seed: Option<u64>, out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
        Ok(Self {
            command: command.to_string(),
            parameters: serde_json::to_value(parameters)?,
            seed,
            out_dir: out_dir.to_path_buf(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            start: Instant::now(),
        })
    }

    /// Reads an input file as text and records its hash.
    pub fn read_input(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(InputHash {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    /// Writes an output file produced by `fill`.
    pub fn write_output(
        &mut self,
        name: &str,
        fill: impl FnOnce(&mut Vec<u8>) -> sobolev_ricci::Result<()>,
    ) -> Result<PathBuf> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        let path = self.out_dir.join(name);
        fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(path.display().to_string());
        Ok(path)
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        self.write_output(name, |buf| {
            serde_json::to_writer_pretty(&mut *buf, value)?;
            buf.push(b'\n');
            Ok(())
        })
    }

    pub fn finish(self) -> Result<PathBuf> {
        let manifest = RunManifest {
            command: self.command.clone(),
            parameters: self.parameters,
            seed: self.seed,
            inputs: self.inputs,
            outputs: self.outputs,
            wall_time_ms: self.start.elapsed().as_secs_f64() * 1e3,
            threads: rayon::current_num_threads(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            git_describe: GIT_DESCRIBE.to_string(),
        };
        let path = self
            .out_dir
            .join(format!("{}.manifest.json", self.command.replace(' ', "-")));
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
