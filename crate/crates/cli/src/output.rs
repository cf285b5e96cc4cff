//! Run provenance and artifact writers.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::args::Command;

pub const TOOL: &str = "tailratio";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stamped into every artifact so it can be regenerated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunInfo {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    /// SHA-256 of the canonical JSON of the seed and subcommand arguments.
    pub config_digest: String,
}

impl RunInfo {
    pub fn new(command: &Command, seed: u64) -> Result<Self> {
        let canonical = serde_json::to_string(&serde_json::json!({ "seed": seed, "args": command }))?;
        Ok(Self {
            tool: TOOL,
            version: VERSION,
            command: command.name(),
            seed,
            config_digest: hex::encode(Sha256::digest(canonical.as_bytes())),
        })
    }

    /// `# key: value` header lines for CSV and text artifacts.
    pub fn metadata(&self) -> Vec<(String, String)> {
        vec![
            ("tool".into(), format!("{} {}", self.tool, self.version)),
            ("command".into(), self.command.into()),
            ("seed".into(), self.seed.to_string()),
            ("config_digest".into(), self.config_digest.clone()),
        ]
    }

    pub fn provenance(&self) -> String {
        format!(
            "{} {} {}; seed {}; config sha256 {}",
            self.tool, self.version, self.command, self.seed, self.config_digest
        )
    }
}

pub struct Outputs {
    dir: PathBuf,
    pub info: RunInfo,
    pub written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path, info: RunInfo) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), info, written: Vec::new() })
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// JSON object with the run stamp under `run` and `payload`'s fields
    /// alongside it.
    pub fn write_json(&mut self, name: &str, payload: &impl Serialize) -> Result<PathBuf> {
        let mut obj = Map::new();
        obj.insert("run".into(), serde_json::to_value(&self.info)?);
        match serde_json::to_value(payload)? {
            Value::Object(fields) => obj.extend(fields),
            other => {
                obj.insert("result".into(), other);
            }
        }
        let text = serde_json::to_string_pretty(&Value::Object(obj))? + "\n";
        self.write_text(name, &text)
    }

    /// CSV with the run stamp (and `extra` lines) as leading comments.
    pub fn write_csv(
        &mut self,
        name: &str,
        extra: &[(String, String)],
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<PathBuf> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)?;
        let mut text = String::new();
        for (k, v) in self.info.metadata().iter().chain(extra) {
            text.push_str(&format!("# {k}: {v}\n"));
        }
        text.push_str(&body);
        self.write_text(name, &text)
    }
}

/// Shortest round-trip form.
pub fn num(x: f64) -> String {
    x.to_string()
}
