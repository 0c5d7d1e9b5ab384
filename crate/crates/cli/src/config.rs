//! `key = value` config files and the flag > file > default layering.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use elastica_core::SolverParams;

use crate::CliError;

/// Keys that set a [`SolverParams`] field.
pub const PARAM_KEYS: [&str; 12] = [
    "a", "b", "lambda", "r1", "r2", "r3", "gamma", "delta1", "delta2", "epsilon", "tol",
    "max-iter",
];

/// Every other key a config file may contain.
pub const OTHER_KEYS: [&str; 13] = [
    "solver",
    "input",
    "rings",
    "size",
    "radii",
    "intensities",
    "center",
    "reference",
    "variance",
    "seed",
    "output",
    "trace",
    "format",
];

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

/// Parsed config file. Keys are normalized to lowercase with dashes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|m| CliError::Config(format!("{}: {m}", path.display())))
    }

    /// Lines are `key = value`; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", idx + 1))?;
            let key = normalize(key);
            if !PARAM_KEYS.contains(&key.as_str()) && !OTHER_KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key `{key}`", idx + 1));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(format!("line {}: duplicate key `{key}`", idx + 1));
            }
        }
        Ok(Self { entries })
    }

    /// Adds `key = value` unless the file already set `key`.
    pub fn with_default(mut self, key: &str, value: &str) -> Self {
        self.entries
            .entry(normalize(key))
            .or_insert_with(|| value.to_string());
        self
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| parse_value(key, v))
            .transpose()
    }

    /// `flag` if given, otherwise the file value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    /// Applies every parameter key in the file on top of `params`.
    pub fn apply_params(&self, params: &mut SolverParams) -> Result<(), CliError> {
        for key in PARAM_KEYS {
            if let Some(value) = self.raw(key) {
                apply_param(params, key, value)?;
            }
        }
        Ok(())
    }
}

pub fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| CliError::Config(format!("invalid value `{value}` for `{key}`: {e}")))
}

/// Sets one named field of `params`; `key` must be one of [`PARAM_KEYS`].
pub fn apply_param(params: &mut SolverParams, key: &str, value: &str) -> Result<(), CliError> {
    let key = normalize(key);
    if key == "max-iter" {
        params.max_iter = parse_value(&key, value)?;
        return Ok(());
    }
    let slot = match key.as_str() {
        "a" => &mut params.a,
        "b" => &mut params.b,
        "lambda" => &mut params.lambda,
        "r1" => &mut params.r1,
        "r2" => &mut params.r2,
        "r3" => &mut params.r3,
        "gamma" => &mut params.gamma,
        "delta1" => &mut params.delta1,
        "delta2" => &mut params.delta2,
        "epsilon" => &mut params.epsilon,
        "tol" => &mut params.tol,
        _ => return Err(CliError::Config(format!("unknown parameter `{key}`"))),
    };
    *slot = parse_value(&key, value)?;
    Ok(())
}

/// Comma-separated reals, e.g. `60,110,160`.
pub fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}
