//! Run manifests and output-file bookkeeping shared by the subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;

/// Record of one invocation: the resolved configuration and the files it
/// produced. The argv echo is the rerun recipe; rerunning it regenerates
/// every listed output bit for bit. Only `wall_clock_seconds` varies
/// between reruns.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
}

/// Collects output paths while a command runs, then writes the manifest
/// next to them as `<stem>.manifest.json`.
pub struct ManifestBuilder {
    command: String,
    stem: String,
    config: serde_json::Value,
    seed: u64,
    started: Instant,
    outputs: Vec<String>,
}

impl ManifestBuilder {
    pub fn new(command: &str, stem: &str, seed: u64, config: serde_json::Value) -> Self {
        ManifestBuilder {
            command: command.to_string(),
            stem: stem.to_string(),
            config,
            seed,
            started: Instant::now(),
            outputs: Vec::new(),
        }
    }

    /// Opens a buffered output file inside `dir` and records its path.
    pub fn create(&mut self, dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
        let path = dir.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        self.outputs.push(path.display().to_string());
        Ok(BufWriter::new(file))
    }

    /// Serializes `value` as pretty JSON into `dir/name` and records it.
    pub fn write_json(
        &mut self,
        dir: &Path,
        name: &str,
        value: &impl Serialize,
    ) -> anyhow::Result<()> {
        let mut out = self.create(dir, name)?;
        serde_json::to_writer_pretty(&mut out, value)
            .with_context(|| format!("serializing {name}"))?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }

    /// Writes CSV lines (header first) into `dir/name` and records it.
    pub fn write_csv(
        &mut self,
        dir: &Path,
        name: &str,
        header: &str,
        rows: &[String],
    ) -> anyhow::Result<()> {
        let mut out = self.create(dir, name)?;
        writeln!(out, "{header}")?;
        for row in rows {
            writeln!(out, "{row}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn manifest_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.manifest.json", self.stem))
    }

    /// Writes the manifest itself. Call after all outputs are on disk.
    pub fn finish(self, dir: &Path) -> anyhow::Result<()> {
        let path = self.manifest_path(dir);
        let manifest = RunManifest {
            command: self.command,
            argv: std::env::args().collect(),
            config: self.config,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            outputs: self.outputs,
        };
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut out, &manifest)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }
}
