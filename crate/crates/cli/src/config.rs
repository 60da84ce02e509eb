//! Config file loading and flag merging.

use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use vqe_recycle::experiment::ExperimentConfig;

/// Env var that overrides the output directory of a config file.
pub const OUT_ENV: &str = "VQE_RECYCLE_OUT";
pub const DEFAULT_OUT: &str = "results";

/// A parsed config file: experiment fields plus paths. Relative paths are
/// resolved against the file's directory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub network: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub datasets: Vec<PathBuf>,
    pub experiment: ExperimentConfig,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        ConfigFile::parse(&text, base).map_err(|e| format!("config {}: {e}", path.display()))
    }

    pub fn parse(text: &str, base: &Path) -> Result<ConfigFile, String> {
        let mut map: Map<String, Value> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let mut path_of = |key: &str| -> Result<Option<PathBuf>, String> {
            match map.remove(key) {
                None | Some(Value::Null) => Ok(None),
                Some(Value::String(s)) => Ok(Some(base.join(s))),
                Some(other) => Err(format!("`{key}` must be a path string, got {other}")),
            }
        };
        let network = path_of("network")?;
        let output_dir = path_of("output_dir")?;
        let datasets = match map.remove("datasets") {
            None | Some(Value::Null) => Vec::new(),
            Some(Value::Array(items)) => items
                .into_iter()
                .map(|v| match v {
                    Value::String(s) => Ok(base.join(s)),
                    other => Err(format!("`datasets` entries must be path strings, got {other}")),
                })
                .collect::<Result<_, _>>()?,
            Some(other) => Err(format!("`datasets` must be a list of paths, got {other}"))?,
        };
        let experiment: ExperimentConfig = serde_json::from_value(Value::Object(map)).map_err(|e| e.to_string())?;
        Ok(ConfigFile {
            network,
            output_dir,
            datasets,
            experiment,
        })
    }
}

/// Output directory: flag, then env var, then config file, then `results`.
pub fn resolve_out_dir(flag: Option<PathBuf>, env: Option<PathBuf>, file: Option<PathBuf>) -> PathBuf {
    flag.or(env).or(file).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Seed list as given on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seeds(pub Vec<u64>);

/// `3`, `1,4,9`, `0..10` (exclusive) or `0..=9`.
pub fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let s = s.trim();
    let num = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("bad seed {t:?}: {e}"));
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        s.split(',').map(num).collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(format!("seed range {s:?} is empty"));
    }
    Ok(Seeds(seeds))
}
