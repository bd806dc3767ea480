//! Run manifests and output plumbing shared by every subcommand.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fpgas_core::schedule::fmt12;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Everything needed to rerun a command. Attached to every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// The full argument list after the binary name, as typed.
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, args: &[String], seed: Option<u64>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            args: args.to_vec(),
            seed,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    fn one_line(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }

    /// Pulls the manifest back out of a file written by any subcommand.
    pub fn extract(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let v: Value = serde_json::from_str(text).context("output is not valid JSON")?;
            let m = v.get("manifest").context("JSON output has no manifest")?;
            return Ok(serde_json::from_value(m.clone())?);
        }
        for line in text.lines() {
            let body = line
                .strip_prefix("# manifest: ")
                .or_else(|| line.strip_prefix("// manifest: "));
            if let Some(body) = body {
                return serde_json::from_str(body).context("malformed manifest line");
            }
        }
        bail!("no manifest found")
    }

    /// The stored arguments with `--out` dropped and optionally replaced.
    pub fn replay_args(&self, out: Option<&str>) -> Vec<String> {
        let mut args = Vec::new();
        let mut it = self.args.iter();
        while let Some(a) = it.next() {
            if a == "--out" || a == "-o" {
                it.next();
            } else if !a.starts_with("--out=") {
                args.push(a.clone());
            }
        }
        if let Some(out) = out {
            args.push("--out".into());
            args.push(out.into());
        }
        args
    }
}

/// Rounds every non-integer number to 12 significant digits.
pub fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            let r: f64 = fmt12(x).parse().expect("fmt12 output parses");
            *v = serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// `{"manifest": …, <key>: payload}` with rounded numbers, pretty-printed.
pub fn json_document(manifest: &RunManifest, key: &str, payload: impl Serialize) -> Result<String> {
    let mut body = serde_json::to_value(payload)?;
    round_numbers(&mut body);
    let mut doc = serde_json::Map::new();
    doc.insert("manifest".into(), serde_json::to_value(manifest)?);
    doc.insert(key.into(), body);
    let mut s = serde_json::to_string_pretty(&Value::Object(doc))?;
    s.push('\n');
    Ok(s)
}

/// Prefixes line-oriented output with a commented manifest.
pub fn commented(manifest: &RunManifest, marker: &str, body: &str) -> String {
    format!("{marker} manifest: {}\n{body}", manifest.one_line())
}

/// Writes to `out`, or stdout when none is given.
pub fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}
