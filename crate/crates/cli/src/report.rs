//! Artifact writing: fixed-column CSV tables, JSON files and the manifest.

use std::fs;
use std::path::{Path, PathBuf};

use frac_orlicz::{DivergenceReport, QuadratureRule};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::CliError;

/// Shortest round-trip form; non-finite values become empty cells.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        x.to_string()
    } else {
        String::new()
    }
}

pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value)?;
        fs::write(self.dir.join(name), text + "\n")?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'a str,
    pub status: &'a str,
    pub seed: u64,
    pub config_sha256: String,
    pub config: &'a Config,
    pub quadrature: QuadratureRule,
    pub files: Vec<String>,
    pub summary: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence: Option<&'a DivergenceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn config_hash(cfg: &Config) -> String {
    let text = serde_json::to_string(cfg).expect("config serializes");
    format!("{:x}", Sha256::digest(text.as_bytes()))
}
