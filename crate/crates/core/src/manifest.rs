//! Run manifests and atomic file output.
//!
//! Every command writes `<output>.manifest.json` next to its primary output.
//! The manifest carries all parameters and seeds, so re-running the recorded
//! command reproduces the outputs bit for bit (timing fields aside).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Result, SpoError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub parameters: BTreeMap<String, Value>,
    pub seeds: Vec<u64>,
    pub input_paths: Vec<String>,
    pub output_paths: Vec<String>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            parameters: BTreeMap::new(),
            seeds: Vec::new(),
            input_paths: Vec::new(),
            output_paths: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).expect("parameter serializes");
        self.parameters.insert(key.to_string(), v);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seeds.push(seed);
        self
    }

    pub fn input(mut self, path: impl AsRef<Path>) -> Self {
        self.input_paths.push(path.as_ref().display().to_string());
        self
    }

    pub fn output(mut self, path: impl AsRef<Path>) -> Self {
        self.output_paths.push(path.as_ref().display().to_string());
        self
    }

    /// Looks up a required parameter, naming the key on failure.
    pub fn get<T: serde::de::DeserializeOwned>(&self, key: &str) -> Result<T> {
        let v = self
            .parameters
            .get(key)
            .ok_or_else(|| SpoError::parse("manifest", format!("missing key `{key}`")))?;
        serde_json::from_value(v.clone())
            .map_err(|e| SpoError::parse("manifest", format!("key `{key}`: {e}")))
    }

    /// Like [`get`](Self::get) but `None` when the key is absent or null.
    pub fn get_opt<T: serde::de::DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        match self.parameters.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(_) => self.get(key).map(Some),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            SpoError::parse(
                "manifest",
                format!("line {} column {}: {e}", e.line(), e.column()),
            )
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SpoError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Writes the manifest next to `primary_output`.
    pub fn write_beside(&self, primary_output: impl AsRef<Path>) -> Result<PathBuf> {
        let path = manifest_path(primary_output);
        write_atomic(&path, self.to_json()?.as_bytes())?;
        Ok(path)
    }
}

/// `out.csv` -> `out.csv.manifest.json`.
pub fn manifest_path(primary_output: impl AsRef<Path>) -> PathBuf {
    let mut s = primary_output.as_ref().as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| SpoError::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = dir.join(tmp_name);
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(SpoError::io(path, e));
    }
    Ok(())
}
