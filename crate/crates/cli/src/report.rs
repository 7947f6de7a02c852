use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const OUT_DIR_ENV: &str = "LAGFACTOR_OUT_DIR";

/// Reproducibility header embedded in every JSON report.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub config: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
}

impl RunManifest {
    pub fn start(subcommand: &'static str) -> Self {
        Self {
            subcommand,
            config: BTreeMap::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION"),
            started_unix_ms: now_ms(),
            finished_unix_ms: 0,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("config values serialize");
        self.config.insert(key.to_owned(), v);
    }

    /// Adds every field of a serializable struct.
    pub fn extend(&mut self, fields: impl Serialize) {
        if let Value::Object(map) = serde_json::to_value(fields).expect("config values serialize") {
            self.config.extend(map);
        }
    }

    fn finish(&mut self) {
        self.finished_unix_ms = now_ms();
    }
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    manifest: &'a RunManifest,
    result: &'a T,
}

/// Directory the report files go to.
pub struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn resolve(flag: Option<&Path>) -> Result<Self, CliError> {
        let dir = match flag {
            Some(d) => d.to_path_buf(),
            None => std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")),
        };
        fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        Ok(Self { dir, written: Vec::new() })
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }

    pub fn report<T: Serialize>(&mut self, name: &str, manifest: &mut RunManifest, result: &T) -> Result<(), CliError> {
        manifest.finish();
        let mut body = serde_json::to_string_pretty(&Report { manifest, result })?;
        body.push('\n');
        self.text(name, &body)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
