//! CSV/JSON rendering and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use igcx_core::models::PRNG_ALGORITHM;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Full round-trip precision: 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header plus rows, LF line endings.
pub fn csv<'a, I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| num(*v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// CSV whose rows mix text labels and numbers.
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, label: &str, idx: &[Option<usize>], value: f64) {
        self.text.push_str(label);
        for i in idx {
            self.text.push(',');
            if let Some(i) = i {
                let _ = write!(self.text, "{i}");
            }
        }
        let _ = writeln!(self.text, ",{}", num(value));
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub timestamp: String,
    pub prng: Option<String>,
}

impl RunManifest {
    pub fn new<P: Serialize>(command: &str, params: &P, seed: Option<u64>) -> Self {
        let mut parameters = serde_json::to_value(params).expect("serializable parameters");
        if let Value::Object(map) = &mut parameters {
            map.remove("out");
            map.remove("config");
        }
        Self {
            command: command.to_string(),
            parameters,
            tool_version: TOOL_VERSION.to_string(),
            seed,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            prng: seed.map(|_| PRNG_ALGORITHM.to_string()),
        }
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes `body` to `out` (with its manifest) or to stdout.
pub fn emit(out: Option<&Path>, body: &str, manifest: &RunManifest) -> io::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, body)?;
            fs::write(manifest_path(path), json(manifest))
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()
        }
    }
}
