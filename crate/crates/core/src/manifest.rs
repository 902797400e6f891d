use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};

/// JSON schema the manifest conforms to.
pub const MANIFEST_SCHEMA: &str = include_str!("../schemas/manifest.schema.json");

pub const GRID_NOTE: &str = "transmit-power, target and density grids are configuration defaults, not values read from the source figures";

/// Record of one CLI run, written as `manifest.json` next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub trials: usize,
    pub threads: Option<usize>,
    pub channel_mode: crate::channel::ChannelMode,
    /// Which estimator the tables report.
    pub estimator: String,
    pub grid_note: &'static str,
    pub config: RunConfig,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: &RunConfig, estimator: impl Into<String>) -> Self {
        Self {
            tool: "retrobeam",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            seed: config.seed,
            trials: config.trials,
            threads: config.threads,
            channel_mode: config.channel_mode,
            estimator: estimator.into(),
            grid_note: GRID_NOTE,
            config: config.clone(),
            wall_time_s: 0.0,
            outputs: Vec::new(),
        }
    }

    /// Records the outputs after checking that each one exists.
    pub fn finish(&mut self, outputs: &[PathBuf], wall_time_s: f64) -> Result<()> {
        for p in outputs {
            if !p.is_file() {
                return Err(Error::Unsupported(format!("expected output {} was not written", p.display())));
            }
        }
        self.outputs = outputs.iter().map(|p| p.display().to_string()).collect();
        self.wall_time_s = wall_time_s;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}
