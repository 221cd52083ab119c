//! CSV tables and JSON summaries. Every file carries the config hash and
//! the tool version; nothing time- or host-dependent is written.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Write with trailing `config_hash` and `version` columns.
    pub fn write(&self, path: &Path, hash: &str) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_path(path)?;
        let mut header = self.header.clone();
        header.extend(["config_hash".to_string(), "version".to_string()]);
        w.write_record(&header)?;
        for row in &self.rows {
            let mut r = row.clone();
            r.extend([hash.to_string(), VERSION.to_string()]);
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    config_hash: &'a str,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, command: &str, hash: &str, body: &T) -> Result<(), CliError> {
    let env = Envelope { tool: "ghzprep", version: VERSION, config_hash: hash, command, body };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn prepare_dir(dir: &Path) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}
