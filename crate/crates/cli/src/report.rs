//! Report envelope and output formats.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use kerneldim::structure::Check;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// A finished run: the machine-readable body plus a flat table for CSV.
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub result: Value,
    pub checks: Vec<Check>,
    pub csv_header: Vec<&'static str>,
    pub csv_rows: Vec<Vec<String>>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "tool": "kerneldim",
            "version": kerneldim::VERSION,
            "command": self.command,
            "config": self.config,
            "result": self.result,
            "checks": self.checks,
            "passed": self.passed(),
        })
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.csv_header)?;
        for row in &self.csv_rows {
            w.write_record(row)?;
        }
        Ok(w.into_inner().context("flushing CSV")?)
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(&self.to_json())?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => self.to_csv(),
        }
    }

    pub fn emit(&self, format: Format, output: Option<&Path>) -> Result<()> {
        let bytes = self.render(format)?;
        match output {
            Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(&bytes)?;
                stdout.flush()?;
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}
