//! Artifact writers: atomic file creation (temp + rename), versioned
//! schema headers, and the run manifest.

use anyhow::Context;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

/// Write bytes atomically: to `<name>.tmp` in the same directory, then
/// rename over the target.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let tmp = dir.join(format!("{name}.tmp"));
    let target = dir.join(name);
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, &target).with_context(|| format!("renaming into {}", target.display()))?;
    Ok(target)
}

/// CSV with a schema-id comment header and fixed column order.
pub struct CsvBuilder {
    schema: String,
    lines: Vec<String>,
}

impl CsvBuilder {
    pub fn new(schema: &str, columns: &[&str]) -> Self {
        CsvBuilder {
            schema: format!("# schema: toffoli-sim/{schema}\n{}", columns.join(",")),
            lines: Vec::new(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.lines.push(fields.join(","));
    }

    pub fn finish(self) -> String {
        let mut out = self.schema;
        for l in self.lines {
            out.push('\n');
            out.push_str(&l);
        }
        out.push('\n');
        out
    }
}

pub fn f(x: f64) -> String {
    // full round-trip precision so reruns are bit-comparable
    format!("{x:.17e}")
}

/// JSON artifact with a schema field injected at the top level.
pub fn json_artifact<T: Serialize>(schema: &str, payload: &T) -> anyhow::Result<String> {
    let mut value = serde_json::to_value(payload)?;
    if let serde_json::Value::Object(map) = &mut value {
        map.insert(
            "schema".to_string(),
            serde_json::Value::String(format!("toffoli-sim/{schema}")),
        );
    }
    Ok(format!("{}\n", serde_json::to_string_pretty(&value)?))
}
