//! JSON run configurations. Every file carries `schema_version` and unknown
//! fields are rejected.

use std::path::{Path, PathBuf};

use divlab_core::lab::{GridSpec, KChoice};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub schema_version: u32,
    pub grid: GridSpec,
    pub seed: u64,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_spectrum")]
    pub spectrum: (f64, f64),
    #[serde(default)]
    pub k: KChoice,
    pub witness_dir: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

/// Shared by `probe` and `dpi`; flags override these values.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeFile {
    pub schema_version: u32,
    pub seed: Option<u64>,
    pub dim: Option<usize>,
    pub samples: Option<usize>,
    pub spectrum: Option<(f64, f64)>,
    pub k: Option<KChoice>,
    pub theta: Option<f64>,
    pub channels: Option<usize>,
    pub state_pairs: Option<usize>,
    pub witness_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteinFile {
    pub schema_version: u32,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub epsilon: f64,
    /// Either `"start:end:step"` or an explicit list.
    pub n: NList,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NList {
    Range(String),
    List(Vec<usize>),
}

impl NList {
    pub fn values(&self) -> Result<Vec<usize>, CliError> {
        match self {
            NList::Range(s) => parse_n_list(s),
            NList::List(v) if !v.is_empty() => Ok(v.clone()),
            NList::List(_) => Err(CliError::usage("n: empty list")),
        }
    }
}

fn default_dim() -> usize {
    2
}

fn default_samples() -> usize {
    200
}

fn default_spectrum() -> (f64, f64) {
    (0.1, 10.0)
}

/// Reads a config file and checks its schema version.
pub fn load<T: DeserializeOwned + Versioned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: T = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
    if cfg.schema_version() != SCHEMA_VERSION {
        return Err(CliError::usage(format!(
            "config {}: schema_version: expected {SCHEMA_VERSION}, found {}",
            path.display(),
            cfg.schema_version()
        )));
    }
    Ok(cfg)
}

pub trait Versioned {
    fn schema_version(&self) -> u32;
}

macro_rules! versioned {
    ($($t:ty),*) => {
        $(impl Versioned for $t {
            fn schema_version(&self) -> u32 {
                self.schema_version
            }
        })*
    };
}

versioned!(SweepFile, ProbeFile, SteinFile);

/// `"10:500:10"` (inclusive) or `"10,20,50"`.
pub fn parse_n_list(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || {
        CliError::usage(format!(
            "invalid N list '{s}' (use start:end:step or a comma list)"
        ))
    };
    let out: Vec<usize> = if s.contains(':') {
        let parts: Vec<usize> = s
            .split(':')
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let [start, end, step] = parts[..] else {
            return Err(bad());
        };
        if step == 0 || start == 0 || end < start {
            return Err(bad());
        }
        (start..=end).step_by(step).collect()
    } else {
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if out.is_empty() || out.contains(&0) {
        return Err(bad());
    }
    Ok(out)
}

/// Comma-separated probabilities from the command line.
#[derive(Debug, Clone)]
pub struct Probs(pub Vec<f64>);

pub fn parse_probs(s: &str) -> Result<Probs, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}")))
        .collect::<Result<_, _>>()
        .map(Probs)
}
