//! Run manifest: config hash, artifact version, timings, outputs, and a
//! diagnostics summary, written next to the data files.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub artifact_version: String,
    pub timings: Vec<StageTiming>,
    pub outputs: Vec<String>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub milliseconds: f64,
}

pub struct ManifestBuilder {
    manifest: RunManifest,
    current: Option<(String, Instant)>,
}

impl ManifestBuilder {
    pub fn new(command: &str, config_text: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(config_text.as_bytes());
        let hash = format!("sha256:{:x}", hasher.finalize());
        Self {
            manifest: RunManifest {
                command: command.to_string(),
                config_hash: hash,
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                timings: Vec::new(),
                outputs: Vec::new(),
                diagnostics: Vec::new(),
            },
            current: None,
        }
    }

    pub fn start_stage(&mut self, stage: &str) {
        self.finish_stage();
        self.current = Some((stage.to_string(), Instant::now()));
    }

    pub fn finish_stage(&mut self) {
        if let Some((stage, started)) = self.current.take() {
            self.manifest.timings.push(StageTiming {
                stage,
                milliseconds: started.elapsed().as_secs_f64() * 1e3,
            });
        }
    }

    pub fn add_output(&mut self, name: &str) {
        self.manifest.outputs.push(name.to_string());
    }

    pub fn add_diagnostic(&mut self, line: impl Into<String>) {
        self.manifest.diagnostics.push(line.into());
    }

    /// Warns when a previous run with the same config hash exists, then
    /// writes `manifest.toml` and verifies every listed output is present.
    pub fn write(mut self, out_dir: &Path) -> Result<(), CliError> {
        self.finish_stage();
        let path = out_dir.join("manifest.toml");
        if let Ok(existing) = std::fs::read_to_string(&path) {
            if existing.contains(self.manifest.config_hash.as_str()) {
                eprintln!(
                    "warning: overwriting outputs of an identical configuration ({})",
                    self.manifest.config_hash
                );
            }
        }
        for output in &self.manifest.outputs {
            let target = out_dir.join(output);
            if !target.exists() {
                return Err(CliError::Numerical(format!(
                    "declared output {} was not written",
                    target.display()
                )));
            }
        }
        let text = toml::to_string_pretty(&self.manifest)
            .map_err(|e| CliError::Numerical(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, text)
            .map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}
