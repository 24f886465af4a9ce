//! Model presets and the Q-matrix file format.

use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{self, c};
use crate::tower::ModelParams;

#[derive(Clone, Debug, PartialEq)]
pub enum ModelPreset {
    /// `Q = I_3`.
    Kac3,
    /// `Q = I_N`.
    KacN(usize),
    /// `Q = [[0, λ, 0], [λ^{-1}, 0, 0], [0, 0, 1]]`, sign `+1`.
    NonKacLambda(f64),
    File(PathBuf),
}

impl ModelPreset {
    /// Parses `kac3`, `kacN:<N>` (or `kac<N>`), `nonkac-lambda:<λ>` and `file:<path>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, arg) = match spec.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (spec, None),
        };
        let need = |what: &str| arg.ok_or_else(|| Error::Config(format!("preset {name} needs a parameter: {name}:<{what}>")));
        match name {
            "kac3" if arg.is_none() => Ok(Self::Kac3),
            "kacN" => {
                let v = need("N")?;
                let n = v.parse().map_err(|_| Error::Config(format!("kacN: bad N {v:?}")))?;
                Self::kac(n)
            }
            "nonkac-lambda" => {
                let v = need("lambda")?;
                let lambda: f64 = v.parse().map_err(|_| Error::Config(format!("nonkac-lambda: bad lambda {v:?}")))?;
                if !(lambda.is_finite() && lambda > 0.0) {
                    return Err(Error::Config(format!("nonkac-lambda: lambda must be positive, got {lambda}")));
                }
                Ok(Self::NonKacLambda(lambda))
            }
            "file" => Ok(Self::File(PathBuf::from(need("path")?))),
            _ => match name.strip_prefix("kac").and_then(|d| d.parse::<usize>().ok()) {
                Some(n) if arg.is_none() => Self::kac(n),
                _ => Err(Error::Config(format!(
                    "unknown preset {spec:?}; use kac3, kacN:<N>, nonkac-lambda:<lambda> or file:<path>"
                ))),
            },
        }
    }

    fn kac(n: usize) -> Result<Self> {
        match n {
            3 => Ok(Self::Kac3),
            n if n >= 2 => Ok(Self::KacN(n)),
            _ => Err(Error::Config(format!("kacN needs N >= 2, got {n}"))),
        }
    }

    pub fn resolve(&self) -> Result<ModelParams> {
        match self {
            Self::Kac3 => ModelParams::new(linalg::eye(3), 1),
            Self::KacN(n) => ModelParams::new(linalg::eye(*n), 1),
            Self::NonKacLambda(lambda) => {
                let mut q = linalg::zeros(3, 3);
                q[(0, 1)] = c(*lambda, 0.0);
                q[(1, 0)] = c(1.0 / lambda, 0.0);
                q[(2, 2)] = c(1.0, 0.0);
                ModelParams::new(q, 1)
            }
            Self::File(path) => read_q_file(path),
        }
    }
}

impl fmt::Display for ModelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Kac3 => write!(f, "kac3"),
            Self::KacN(n) => write!(f, "kacN:{n}"),
            Self::NonKacLambda(l) => write!(f, "nonkac-lambda:{l}"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

pub fn read_q_file(path: &Path) -> Result<ModelParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_q_json(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses `{"N": int, "sign": ±1, "entries": [[re, im], …]}` (row-major, `N²` pairs).
/// Syntax errors report line and column; structural errors report the JSON path.
pub fn parse_q_json(text: &str) -> Result<ModelParams> {
    let v: Value = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        let msg = msg.strip_suffix(&suffix).unwrap_or(&msg);
        Error::Config(format!("line {}, column {}: {msg}", e.line(), e.column()))
    })?;
    let obj = v.as_object().ok_or_else(|| Error::Config("top level: expected an object".into()))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "N" | "sign" | "entries") {
            return Err(Error::Config(format!("top level: unknown field {key:?}")));
        }
    }
    let n = obj
        .get("N")
        .ok_or_else(|| Error::Config("missing field N".into()))?
        .as_u64()
        .filter(|&n| n >= 2)
        .ok_or_else(|| Error::Config("N: expected an integer >= 2".into()))? as usize;
    let sign = match obj.get("sign").ok_or_else(|| Error::Config("missing field sign".into()))?.as_i64() {
        Some(s @ (1 | -1)) => s as i32,
        _ => return Err(Error::Config("sign: expected +1 or -1".into())),
    };
    let entries = obj
        .get("entries")
        .ok_or_else(|| Error::Config("missing field entries".into()))?
        .as_array()
        .ok_or_else(|| Error::Config("entries: expected an array".into()))?;
    if entries.len() != n * n {
        return Err(Error::Config(format!("entries: expected N² = {} pairs, got {}", n * n, entries.len())));
    }
    let mut q = linalg::zeros(n, n);
    for (idx, e) in entries.iter().enumerate() {
        let (i, j) = (idx / n, idx % n);
        let pair = e.as_array().filter(|p| p.len() == 2);
        let parts = pair.and_then(|p| Some((p[0].as_f64()?, p[1].as_f64()?)));
        let (re, im) = parts.ok_or_else(|| {
            Error::Config(format!("entries[{idx}] (row {i}, column {j}): expected a pair [re, im] of numbers"))
        })?;
        q[(i, j)] = c(re, im);
    }
    ModelParams::new(q, sign).map_err(|e| Error::Config(format!("Q matrix: {e}")))
}
