//! Run manifests: every command records its resolved parameters next to
//! its outputs so runs can be replayed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use crate::ToolError;

/// Ordered key=value record of one command invocation.
#[derive(Debug, Clone)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
    started: Instant,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        let mut m = Self {
            entries: Vec::new(),
            started: Instant::now(),
        };
        m.set("command", command);
        m.set("version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Writes the manifest, appending the elapsed wall time.
    pub fn write(&self, path: &Path) -> Result<(), ToolError> {
        let mut file = BufWriter::new(File::create(path)?);
        for (key, value) in &self.entries {
            writeln!(file, "{key}={value}")?;
        }
        writeln!(file, "elapsed_ms={}", self.started.elapsed().as_millis())?;
        Ok(())
    }

    /// Parses a previously written manifest.
    pub fn load(path: &Path) -> Result<Self, ToolError> {
        let text = std::fs::read_to_string(path)?;
        let mut entries = Vec::new();
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                entries.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        Ok(Self {
            entries,
            started: Instant::now(),
        })
    }
}
