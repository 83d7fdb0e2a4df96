use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use subspectra::{Error, Result};

/// Collects a command's CSV rows and writes them with the run manifest.
pub struct Run {
    pub command: String,
    pub out: PathBuf,
    pub params: Value,
    pub config_hash: Option<String>,
    pub precision_bits: u32,
    pub derived: Map<String, Value>,
    started: Instant,
}

impl Run {
    pub fn new(command: &str, out: &Path, params: Value, config_text: Option<&str>, precision_bits: u32) -> Result<Run> {
        fs::create_dir_all(out).map_err(|e| Error::Config(format!("{}: {e}", out.display())))?;
        Ok(Run {
            command: command.to_string(),
            out: out.to_path_buf(),
            params,
            config_hash: config_text.map(|t| hex::encode(Sha256::digest(t.as_bytes()))),
            precision_bits,
            derived: Map::new(),
            started: Instant::now(),
        })
    }

    pub fn derive(&mut self, key: &str, v: impl Serialize) {
        self.derived.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    fn stem(&self) -> String {
        self.command.replace(' ', "-")
    }

    pub fn csv_path(&self) -> PathBuf {
        self.out.join(format!("{}.csv", self.stem()))
    }

    pub fn write_csv(&self, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let io = |e: csv::Error| Error::Config(format!("{}: {e}", self.csv_path().display()));
        let mut w = csv::Writer::from_path(self.csv_path()).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn write_json(&self, name: &str, v: &impl Serialize) -> Result<PathBuf> {
        let p = self.out.join(name);
        let text = serde_json::to_string_pretty(v).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(&p, text + "\n").map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
        Ok(p)
    }

    /// Writes `<command>.manifest.json`; timing lives only here.
    pub fn finish(self, status: &str) -> Result<()> {
        let m = json!({
            "command": self.command,
            "config_hash": self.config_hash,
            "parameters": self.params,
            "precision_bits": self.precision_bits,
            "library_version": env!("CARGO_PKG_VERSION"),
            "derived": Value::Object(self.derived.clone()),
            "status": status,
            "wall_time_s": self.started.elapsed().as_secs_f64(),
        });
        self.write_json(&format!("{}.manifest.json", self.stem()), &m).map(|_| ())
    }
}

/// Shortest round-trip decimal form; `.` separator regardless of locale.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
