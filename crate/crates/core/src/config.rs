//! Run configuration: `key = value` files plus command-line overrides.
//!
//! Both sources are reduced to the same string assignments, so a flag and a
//! file line accept identical syntax. Integer parameters take `3`, `1..4`
//! (inclusive) or `1,2,5`; `epsilon` takes a comma list of reals or `p/q`
//! fractions; `sa`/`sb` take complex literals such as `0.3+0.1i`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amplitude::{parse_complex, Complex, DEFAULT_TOLERANCE};
use crate::fock::Statistics;

pub const DEFAULT_FERMION_CAP: u32 = 8;
pub const CAP_ENV_VAR: &str = "MIXBENCH_NMAX_CAP";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Type1,
    Type2,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Type1 => "type1",
            Experiment::Type2 => "type2",
        })
    }
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "type1" | "i" | "1" => Ok(Experiment::Type1),
            "type2" | "ii" | "2" => Ok(Experiment::Type2),
            _ => Err("expected type1 or type2".into()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Firstq,
    Oracle,
    Closed,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::Firstq, Engine::Oracle, Engine::Closed];
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Firstq => "firstq",
            Engine::Oracle => "oracle",
            Engine::Closed => "closed",
        })
    }
}

impl FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "firstq" => Ok(Engine::Firstq),
            "oracle" => Ok(Engine::Oracle),
            "closed" => Ok(Engine::Closed),
            _ => Err(format!("unknown engine {s:?} (expected firstq, oracle or closed)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err("expected table, csv or json".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub statistics: Statistics,
    pub n1: Vec<u32>,
    pub n2: Vec<u32>,
    pub n3: Vec<u32>,
    pub n: Vec<u32>,
    pub epsilon: Vec<f64>,
    pub sa: Complex,
    pub sb: Complex,
    /// `None` selects every engine that is feasible at each grid point.
    pub engines: Option<Vec<Engine>>,
    pub output: OutputFormat,
    pub tolerance: f64,
    pub nmax: u32,
    /// Largest particle number for first-quantized fermion runs.
    pub fermion_cap: u32,
    pub out: Option<PathBuf>,
    pub destination: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Type1,
            statistics: Statistics::Boson,
            n1: vec![1],
            n2: vec![1],
            n3: vec![1],
            n: vec![3],
            epsilon: vec![1.0 / 3.0],
            sa: Complex::new(1.0, 0.0),
            sb: Complex::new(1.0, 0.0),
            engines: None,
            output: OutputFormat::Table,
            tolerance: DEFAULT_TOLERANCE,
            nmax: 8,
            fermion_cap: DEFAULT_FERMION_CAP,
            out: None,
            destination: None,
        }
    }
}

pub const KEYS: [&str; 16] = [
    "experiment",
    "statistics",
    "n1",
    "n2",
    "n3",
    "n",
    "epsilon",
    "sa",
    "sb",
    "engines",
    "format",
    "tolerance",
    "nmax",
    "cap",
    "out",
    "destination",
];

/// Parses `key = value` lines; `#` starts a comment. Later lines win.
pub fn parse_assignments(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: idx + 1,
            text: raw.to_string(),
        })?;
        let key = key.trim().to_ascii_lowercase();
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            });
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

fn value_error(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.into(),
        value: value.into(),
        reason: reason.into(),
    }
}

/// `3`, `1..4` (inclusive) or `1,2,5`.
pub fn parse_int_grid(key: &str, value: &str) -> Result<Vec<u32>, ConfigError> {
    let int = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|e| value_error(key, value, e.to_string()))
    };
    let mut grid = Vec::new();
    for part in value.split(',') {
        match part.split_once("..") {
            Some((lo, hi)) => {
                let hi = hi.strip_prefix('=').unwrap_or(hi);
                let (lo, hi) = (int(lo)?, int(hi)?);
                if lo > hi {
                    return Err(value_error(key, value, "empty range"));
                }
                grid.extend(lo..=hi);
            }
            None => grid.push(int(part)?),
        }
    }
    Ok(grid)
}

/// Real literal or `p/q` fraction.
pub fn parse_real(key: &str, text: &str) -> Result<f64, ConfigError> {
    let t = text.trim();
    let parsed = match t.split_once('/') {
        Some((p, q)) => p
            .trim()
            .parse::<f64>()
            .and_then(|p| q.trim().parse::<f64>().map(|q| p / q)),
        None => t.parse::<f64>(),
    };
    match parsed {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(value_error(key, text, "not finite")),
        Err(e) => Err(value_error(key, text, e.to_string())),
    }
}

impl RunConfig {
    /// Applies assignments on top of `self`.
    pub fn apply(&mut self, assignments: &BTreeMap<String, String>) -> Result<(), ConfigError> {
        for (key, value) in assignments {
            let bad = |reason: String| value_error(key, value, reason);
            match key.as_str() {
                "experiment" => self.experiment = value.parse().map_err(bad)?,
                "statistics" => self.statistics = value.parse().map_err(bad)?,
                "n1" => self.n1 = parse_int_grid(key, value)?,
                "n2" => self.n2 = parse_int_grid(key, value)?,
                "n3" => self.n3 = parse_int_grid(key, value)?,
                "n" => self.n = parse_int_grid(key, value)?,
                "epsilon" => {
                    self.epsilon = value.split(',').map(|t| parse_real(key, t)).collect::<Result<_, _>>()?;
                }
                "sa" => self.sa = parse_complex(value).map_err(|e| bad(e.to_string()))?,
                "sb" => self.sb = parse_complex(value).map_err(|e| bad(e.to_string()))?,
                "engines" => {
                    let engines = value
                        .split(',')
                        .map(|t| t.trim())
                        .filter(|t| !t.is_empty())
                        .map(|t| {
                            if t.eq_ignore_ascii_case("all") {
                                Ok(None)
                            } else {
                                t.parse().map(Some)
                            }
                        })
                        .collect::<Result<Vec<Option<Engine>>, String>>()
                        .map_err(bad)?;
                    self.engines = if engines.iter().any(Option::is_none) {
                        None
                    } else {
                        let mut list: Vec<Engine> = engines.into_iter().flatten().collect();
                        list.sort();
                        list.dedup();
                        Some(list)
                    };
                }
                "format" => self.output = value.parse().map_err(bad)?,
                "tolerance" => self.tolerance = parse_real(key, value)?,
                "nmax" => self.nmax = parse_int_grid(key, value).and_then(|g| single(key, value, &g))?,
                "cap" => self.fermion_cap = parse_int_grid(key, value).and_then(|g| single(key, value, &g))?,
                "out" => self.out = Some(PathBuf::from(value)),
                "destination" => self.destination = Some(value.clone()),
                _ => return Err(ConfigError::UnknownKey(key.clone())),
            }
        }
        Ok(())
    }

    /// Reads `MIXBENCH_NMAX_CAP` into the fermion cap when set.
    pub fn apply_env(&mut self) -> Result<(), ConfigError> {
        if let Ok(value) = std::env::var(CAP_ENV_VAR) {
            let grid = parse_int_grid(CAP_ENV_VAR, &value)?;
            self.fermion_cap = single(CAP_ENV_VAR, &value, &grid)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |key: &str, reason: &str| value_error(key, "", reason);
        for (key, grid) in [("n1", &self.n1), ("n2", &self.n2), ("n3", &self.n3), ("n", &self.n)] {
            if grid.is_empty() {
                return Err(err(key, "grid must not be empty"));
            }
        }
        if self.epsilon.is_empty() {
            return Err(err("epsilon", "grid must not be empty"));
        }
        if matches!(&self.engines, Some(e) if e.is_empty()) {
            return Err(err("engines", "select at least one engine"));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(value_error(
                "tolerance",
                &self.tolerance.to_string(),
                "must be positive",
            ));
        }
        match self.experiment {
            Experiment::Type1 => {
                if self.n1.contains(&0) || self.n2.contains(&0) {
                    return Err(err("n1/n2", "type1 needs at least one particle in each input mode"));
                }
            }
            Experiment::Type2 => {
                if self.n.iter().any(|&n| n < 2) {
                    return Err(err("n", "type2 needs n >= 2"));
                }
                if let Some(e) = self.epsilon.iter().find(|e| !(0.0..1.0).contains(*e)) {
                    return Err(value_error("epsilon", &e.to_string(), "must lie in [0, 1)"));
                }
            }
        }
        Ok(())
    }
}

fn single(key: &str, value: &str, grid: &[u32]) -> Result<u32, ConfigError> {
    match grid {
        [v] => Ok(*v),
        _ => Err(value_error(key, value, "expected a single integer")),
    }
}
