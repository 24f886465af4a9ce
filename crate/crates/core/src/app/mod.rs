//! Operational shell: presets, the on-disk tower cache, reports and walk simulation.

mod preset;
mod report;
mod walk;

pub use preset::{parse_q_json, read_q_file, ModelPreset};
pub use report::{strip_runtime, to_json_string, ModelDescriptor, Report, REPORT_VERSION};
pub use walk::{level_distribution, simulate_walk, LevelVisits, WalkStats};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::tower::{read_cache, write_cache, ModelParams, Tower};

pub const CACHE_DIR_ENV: &str = "OQLAB_CACHE_DIR";

/// `$OQLAB_CACHE_DIR`, else `.oqlab-cache` in the working directory.
pub fn cache_dir() -> PathBuf {
    match std::env::var_os(CACHE_DIR_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => PathBuf::from(".oqlab-cache"),
    }
}

/// Cache file name for one model and level cap; the hash covers Q, the sign and `L`.
pub fn cache_file_name(params: &ModelParams, max_level: usize) -> String {
    format!("tower-N{}-L{}-{}.oqtw", params.n(), max_level, &params.hash_hex(max_level)[..16])
}

pub fn cache_path(params: &ModelParams, max_level: usize) -> PathBuf {
    cache_dir().join(cache_file_name(params, max_level))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TowerSource {
    Built,
    Cache,
}

/// Loads the tower from `path` when it exists (a damaged or mismatched file is an error,
/// never silently rebuilt), otherwise builds it in memory.
pub fn load_or_build(params: ModelParams, max_level: usize, path: Option<&Path>) -> Result<(Tower, TowerSource)> {
    if let Some(p) = path {
        if p.exists() {
            return Ok((read_cache(p, params, max_level)?, TowerSource::Cache));
        }
    }
    Ok((Tower::build(params, max_level)?, TowerSource::Built))
}

pub fn build_and_cache(params: ModelParams, max_level: usize, path: &Path) -> Result<Tower> {
    let tower = Tower::build(params, max_level)?;
    write_cache(&tower, path)?;
    Ok(tower)
}

/// Single-writer file output: temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?
        .to_string_lossy()
        .into_owned();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
