//! Verification reports: JSON with 17 significant digits per float, sorted keys.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Result;
use crate::tower::Tower;
use crate::verify::{CheckParams, CheckResult};

use super::{write_atomic, ModelPreset};

pub const REPORT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelDescriptor {
    pub preset: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub hash: String,
    pub q: f64,
    #[serde(rename = "normF1")]
    pub norm_f1: f64,
    pub sign: i32,
}

impl ModelDescriptor {
    pub fn new(preset: &ModelPreset, tower: &Tower) -> Self {
        let p = tower.params();
        Self {
            preset: preset.to_string(),
            n: p.n(),
            hash: p.hash_hex(tower.max_level()),
            q: p.q(),
            norm_f1: p.rho(),
            sign: p.sign(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub version: String,
    pub model: ModelDescriptor,
    pub tower_level: usize,
    pub checks: Vec<CheckResult>,
    pub seed: u64,
    pub tolerance: f64,
    pub trials: usize,
    pub precision: String,
    pub pass: bool,
}

impl Report {
    pub fn new(preset: &ModelPreset, tower: &Tower, params: CheckParams, checks: Vec<CheckResult>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            version: REPORT_VERSION.to_string(),
            model: ModelDescriptor::new(preset, tower),
            tower_level: tower.max_level(),
            checks,
            seed: params.seed,
            tolerance: params.tol,
            trials: params.trials,
            precision: "f64 (IEEE 754 binary64)".to_string(),
            pass,
        }
    }

    pub fn to_value(&self) -> Result<Value> {
        Ok(serde_json::to_value(self)?)
    }

    /// The report as JSON text; with `runtime = false` every `runtimeMs` field is dropped.
    pub fn to_json(&self, runtime: bool) -> Result<String> {
        let mut v = self.to_value()?;
        if !runtime {
            strip_runtime(&mut v);
        }
        Ok(to_json_string(&v))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json(true)?.as_bytes())
    }
}

/// Removes every `runtimeMs` key, recursively.
pub fn strip_runtime(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("runtimeMs");
            map.values_mut().for_each(strip_runtime);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_runtime),
        _ => {}
    }
}

/// Pretty JSON where every non-integer number is written as `{:.16e}` (17 significant digits).
pub fn to_json_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().unwrap_or(f64::NAN);
                let _ = write!(out, "{x:.16e}");
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // short scalar arrays (index tuples) stay on one line
            if items.len() <= 8 && items.iter().all(|i| i.is_number()) {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => write_object(out, map, indent),
    }
}

fn write_object(out: &mut String, map: &Map<String, Value>, indent: usize) {
    if map.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    for (k, (key, val)) in map.iter().enumerate() {
        pad(out, indent + 1);
        out.push_str(&Value::String(key.clone()).to_string());
        out.push_str(": ");
        write_value(out, val, indent + 1);
        out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
    }
    pad(out, indent);
    out.push('}');
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}
