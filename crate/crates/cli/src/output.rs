//! Output files, buffered until the whole run succeeds.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Outputs {
    config_hash: String,
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn new(config_hash: String) -> Self {
        Self { config_hash, files: Vec::new() }
    }

    pub fn header_line(&self) -> String {
        format!("# gps {TOOL_VERSION} config_sha256={}", self.config_hash)
    }

    /// CSV with a comment header line, then the column header, LF endings.
    pub fn csv(&mut self, name: &str, columns: &str, rows: &[Vec<String>]) {
        let mut s = String::new();
        writeln!(s, "{}", self.header_line()).unwrap();
        writeln!(s, "{columns}").unwrap();
        for r in rows {
            writeln!(s, "{}", r.join(",")).unwrap();
        }
        self.files.push((name.to_string(), s));
    }

    /// JSON object; the hash and version go under `_meta` since JSON has
    /// no comments.
    pub fn json(&mut self, name: &str, mut body: Value) {
        if let Value::Object(map) = &mut body {
            map.insert("_meta".into(), json!({ "tool": "gps", "version": TOOL_VERSION, "config_sha256": self.config_hash }));
        }
        let mut s = serde_json::to_string_pretty(&body).expect("json serializes");
        s.push('\n');
        self.files.push((name.to_string(), s));
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|f| f.0.as_str()).collect()
    }

    pub fn write_all(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        for (name, content) in &self.files {
            std::fs::write(dir.join(name), content)?;
        }
        Ok(())
    }
}

/// Shortest round-trip decimal with `.` separator; exponent notation
/// outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `null` for non-finite values.
pub fn jnum(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
