use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};

pub const TOOL: &str = "necrostrip";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Round-trip formatting for CSV cells: 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Resolved config embedded in every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    /// Derived quantities the run actually used, e.g. an absolute `gamma`.
    pub resolved: Value,
}

impl Provenance {
    pub fn new(command: &str, config: &RunConfig, resolved: Value) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            config: config.clone(),
            resolved,
        }
    }

    /// `#`-prefixed lines for a CSV header.
    pub fn csv_header(&self) -> String {
        let body = serde_json::to_string(self).expect("provenance serializes");
        format!(
            "# {TOOL} {VERSION} {}\n# provenance: {body}\n",
            self.command
        )
    }

    pub fn header_lines(&self) -> Vec<String> {
        self.csv_header()
            .lines()
            .map(|l| l.trim_start_matches("# ").to_string())
            .collect()
    }
}

/// Collects files and writes them only once the whole run succeeded, so a
/// failing command leaves no partial data behind unless asked to.
pub struct Outputs<'a> {
    dir: PathBuf,
    config: &'a RunConfig,
    files: Vec<(String, String)>,
}

impl<'a> Outputs<'a> {
    pub fn new(config: &'a RunConfig, dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            config,
            files: Vec::new(),
        }
    }

    pub fn csv(&mut self, name: &str, provenance: &Provenance, body: String) {
        if self.config.writes(Format::Csv) {
            self.files
                .push((name.to_string(), provenance.csv_header() + &body));
        }
    }

    /// A CSV whose body already carries the provenance header.
    pub fn csv_with_header(&mut self, name: &str, text: String) {
        if self.config.writes(Format::Csv) {
            self.files.push((name.to_string(), text));
        }
    }

    pub fn json<T: Serialize>(&mut self, name: &str, provenance: &Provenance, data: &T) {
        if self.config.writes(Format::Json) {
            let doc = json!({ "provenance": provenance, "data": data });
            let mut text = serde_json::to_string_pretty(&doc).expect("output serializes");
            text.push('\n');
            self.files.push((name.to_string(), text));
        }
    }

    pub fn flush(self) -> CliResult<Vec<PathBuf>> {
        if self.files.is_empty() {
            return Ok(Vec::new());
        }
        fs::create_dir_all(&self.dir).map_err(|source| CliError::Write {
            path: self.dir.clone(),
            source,
        })?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, text) in self.files {
            let path = self.dir.join(name);
            fs::write(&path, text).map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Joins cells with commas and terminates the row.
pub fn row(out: &mut String, cells: &[String]) {
    let _ = writeln!(out, "{}", cells.join(","));
}
