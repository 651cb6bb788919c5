//! Provenance sidecars written next to every output file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::sha256_hex;

pub const TOOL_NAME: &str = "codeprobe";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub flags: BTreeMap<String, String>,
    /// Input path → SHA-256 of its contents.
    pub inputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub timestamp: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            flags: BTreeMap::new(),
            inputs: BTreeMap::new(),
            seed: None,
            timestamp: timestamp(),
            notes: BTreeMap::new(),
        }
    }

    pub fn flag(mut self, name: &str, value: impl ToString) -> Self {
        self.flags.insert(name.into(), value.to_string());
        self
    }

    pub fn note(mut self, name: &str, value: impl ToString) -> Self {
        self.notes.insert(name.into(), value.to_string());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Record the SHA-256 of a file, or of every file under a directory.
    pub fn input(mut self, path: &Path) -> Result<Self> {
        if path.is_dir() {
            let mut files: Vec<PathBuf> = walkdir::WalkDir::new(path)
                .into_iter()
                .filter_map(|e| e.ok())
                .filter(|e| e.file_type().is_file())
                .map(|e| e.into_path())
                .collect();
            files.sort();
            let mut hasher_input = String::new();
            for f in files {
                let bytes = fs::read(&f).map_err(|e| Error::io(&f, e))?;
                let rel = f.strip_prefix(path).unwrap_or(&f);
                hasher_input.push_str(&format!("{}  {}\n", sha256_hex(&bytes), rel.display()));
            }
            self.inputs.insert(path.display().to_string(), sha256_hex(hasher_input.as_bytes()));
        } else {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        }
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Write the manifest to `<output>.manifest.json`.
    pub fn write_for(&self, output: &Path) -> Result<PathBuf> {
        let path = sidecar_path(output);
        fs::write(&path, self.to_json()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<RunManifest> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// RFC 3339 UTC time, taken from `SOURCE_DATE_EPOCH` when it is set.
pub fn timestamp() -> String {
    let time = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0))
        .unwrap_or_else(Utc::now);
    time.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Look up a value recorded by whatever produced `output`: a top-level key,
/// or an entry under `flags` or `notes`, in its sidecar manifest.
pub fn sidecar_value(output: &Path, key: &str) -> Option<String> {
    let text = fs::read_to_string(sidecar_path(output)).ok()?;
    let json: serde_json::Value = serde_json::from_str(&text).ok()?;
    let pick = |v: &serde_json::Value| match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Null => None,
        other => Some(other.to_string()),
    };
    json.get(key)
        .and_then(pick)
        .or_else(|| json.get("flags").and_then(|f| f.get(key)).and_then(pick))
        .or_else(|| json.get("notes").and_then(|f| f.get(key)).and_then(pick))
}
