//! CSV and JSON writers. Every file starts with a header naming the tool
//! version and the SHA-256 of the resolved configuration, and nothing in
//! them depends on time or thread scheduling.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::LabError;

pub const TOOL: &str = "twowell";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn config_hash(config: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(config.canonical().as_bytes()))
}

pub struct OutputDir {
    dir: PathBuf,
    hash: String,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(config: &ExperimentConfig) -> Result<Self, LabError> {
        fs::create_dir_all(&config.output)?;
        Ok(OutputDir {
            dir: config.output.clone(),
            hash: config_hash(config),
            written: Vec::new(),
        })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn header_lines(&self) -> String {
        format!("# tool: {TOOL} {VERSION}\n# config_sha256: {}\n", self.hash)
    }

    /// Rows of numbers under a `#` header and one line of column names.
    pub fn csv<I>(&mut self, name: &str, columns: &[&str], rows: I) -> Result<PathBuf, LabError>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let mut text = self.header_lines();
        text.push_str(&columns.join(","));
        text.push('\n');
        for row in rows {
            debug_assert_eq!(row.len(), columns.len());
            let mut first = true;
            for v in row {
                if !first {
                    text.push(',');
                }
                first = false;
                write!(text, "{v}").unwrap();
            }
            text.push('\n');
        }
        self.write(name, &text)
    }

    /// `payload` merged into an object with a `header` entry.
    pub fn json(&mut self, name: &str, payload: Value) -> Result<PathBuf, LabError> {
        let mut obj = serde_json::Map::new();
        obj.insert(
            "header".into(),
            json!({ "tool": TOOL, "version": VERSION, "config_sha256": self.hash }),
        );
        match payload {
            Value::Object(map) => obj.extend(map),
            other => {
                obj.insert("data".into(), other);
            }
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(obj)).expect("json serialises");
        text.push('\n');
        self.write(name, &text)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<PathBuf, LabError> {
        let text = format!("{}{body}", self.header_lines());
        self.write(name, &text)
    }

    fn write(&mut self, name: &str, text: &str) -> Result<PathBuf, LabError> {
        let path = self.dir.join(name);
        fs::write(&path, text)?;
        self.written.push(path.clone());
        Ok(path)
    }
}

/// JSON number, or `null` for NaN and infinities which JSON cannot carry.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

pub fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}
