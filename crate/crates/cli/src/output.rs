//! Atomic artifact writes and the run summary.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::config::Config;
use crate::experiments::{Check, Outcome};

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: &'a str,
    pub passed: bool,
    pub checks: &'a [Check],
    pub failures: &'a [String],
    pub details: &'a serde_json::Map<String, serde_json::Value>,
    pub config: &'a Config,
}

impl<'a> Summary<'a> {
    pub fn new(experiment: &'a str, outcome: &'a Outcome, config: &'a Config) -> Self {
        Self {
            tool: "kernel-lab",
            version: env!("CARGO_PKG_VERSION"),
            experiment,
            passed: outcome.passed(),
            checks: &outcome.checks,
            failures: &outcome.failures,
            details: &outcome.details,
            config,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Writes `bytes` to `dir/name` through a temporary file in the same directory.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let target = dir.join(name);
    let mut tmp = NamedTempFile::new_in(dir).with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target).with_context(|| format!("writing {}", target.display()))?;
    Ok(())
}

pub fn write_artifacts(dir: &Path, experiment: &str, outcome: &Outcome, config: &Config) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_atomic(dir, &format!("{experiment}.csv"), &outcome.csv)?;
    write_atomic(dir, "summary.json", Summary::new(experiment, outcome, config).to_json()?.as_bytes())
}
