use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    /// Fully resolved settings; passing this file back through `--config`
    /// repeats the run.
    pub config_echo: Value,
    pub seed: u64,
    /// Written files, relative to the output directory.
    pub artifact_paths: Vec<String>,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
}

/// Collects artifacts and phase timings while a command runs.
pub struct Run {
    out: PathBuf,
    artifacts: Vec<String>,
    timings: BTreeMap<String, f64>,
}

impl Run {
    pub fn new(out: &Path) -> Result<Self> {
        std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        Ok(Run {
            out: out.to_path_buf(),
            artifacts: Vec::new(),
            timings: BTreeMap::new(),
        })
    }

    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f();
        *self.timings.entry(phase.to_string()).or_default() += start.elapsed().as_secs_f64();
        out
    }

    pub fn write(&mut self, rel: &str, contents: &str) -> Result<PathBuf> {
        let path = self.out.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.artifacts.push(rel.to_string());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.write(rel, &text)
    }

    pub fn finish<C: Serialize>(self, command: &str, config: &C, seed: u64) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: command.to_string(),
            config_echo: serde_json::to_value(config).expect("settings serialize"),
            seed,
            artifact_paths: self.artifacts,
            timings: self.timings,
        };
        let path = self.out.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}
