//! Run configuration: flat key=value parameter files, CLI overrides, and
//! the precedence bookkeeping the manifest records.
//!
//! Precedence per parameter key: CLI flag > config file > built-in REF-A
//! defaults. Every resolved key remembers where its value came from so a
//! run can be reproduced from its manifest alone.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::grid::Scheme;
use crate::model::ModelParams;
use crate::tolerances::GRID_N_PRODUCTION;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("config line {line}: expected key=value, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("config line {line}: unknown parameter key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: `{key}` has non-numeric value `{value}`")]
    BadValue { line: usize, key: String, value: String },
    #[error("unknown parameter key `{0}` in override")]
    UnknownOverride(String),
    #[error("unknown scheme `{0}` (expected uniform-fd2 or stretched-collocation)")]
    BadScheme(String),
}

/// Where a resolved parameter value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueSource {
    Default,
    ConfigFile,
    CliFlag,
}

/// Model parameters resolved from defaults, file, and CLI, with provenance.
#[derive(Debug, Clone)]
pub struct ResolvedParams {
    pub params: ModelParams,
    pub sources: BTreeMap<String, ValueSource>,
}

impl ResolvedParams {
    /// Starts from the built-in REF-A defaults.
    pub fn from_defaults() -> Self {
        let sources = ModelParams::keys()
            .iter()
            .map(|k| (k.to_string(), ValueSource::Default))
            .collect();
        ResolvedParams { params: ModelParams::ref_a(), sources }
    }

    /// Starts from a named built-in set (`ref-a` or `ref-b`).
    pub fn from_preset(name: &str) -> Option<Self> {
        let params = match name {
            "ref-a" | "REF-A" => ModelParams::ref_a(),
            "ref-b" | "REF-B" => ModelParams::ref_b(),
            _ => return None,
        };
        let sources = ModelParams::keys()
            .iter()
            .map(|k| (k.to_string(), ValueSource::Default))
            .collect();
        Some(ResolvedParams { params, sources })
    }

    /// Applies a flat key=value config file. Lines starting with `#` and
    /// blank lines are ignored; keys are exactly the parameter field names.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        self.apply_key_values(&text)
    }

    /// Applies config text (see [`Self::apply_file`]).
    pub fn apply_key_values(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| ConfigError::Malformed { line, text: trimmed.to_string() })?;
            let key = key.trim();
            let value = value.trim();
            let parsed: f64 = value.parse().map_err(|_| ConfigError::BadValue {
                line,
                key: key.to_string(),
                value: value.to_string(),
            })?;
            self.params
                .set_key(key, parsed)
                .map_err(|_| ConfigError::UnknownKey { line, key: key.to_string() })?;
            self.sources.insert(key.to_string(), ValueSource::ConfigFile);
        }
        Ok(())
    }

    /// Applies `key=value` CLI overrides (highest precedence).
    pub fn apply_cli_overrides(&mut self, overrides: &[(String, f64)]) -> Result<(), ConfigError> {
        for (key, value) in overrides {
            self.params
                .set_key(key, *value)
                .map_err(|_| ConfigError::UnknownOverride(key.clone()))?;
            self.sources.insert(key.clone(), ValueSource::CliFlag);
        }
        Ok(())
    }
}

/// Grid part of a run configuration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridConfig {
    pub n_nodes: usize,
    pub scheme: Scheme,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n_nodes: GRID_N_PRODUCTION, scheme: Scheme::UniformFd2 }
    }
}

pub fn parse_scheme(s: &str) -> Result<Scheme, ConfigError> {
    Scheme::parse(s).ok_or_else(|| ConfigError::BadScheme(s.to_string()))
}

/// Parses comma-separated lists like `2,3` and `1e-2,5e-3`.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|_| format!("cannot parse `{x}`")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_cli_over_file_over_default() {
        let mut r = ResolvedParams::from_defaults();
        r.apply_key_values("mu = 2.5\n# comment\nrho2=0.7\n").unwrap();
        r.apply_cli_overrides(&[("mu".to_string(), 3.25)]).unwrap();
        assert_eq!(r.params.mu, 3.25);
        assert_eq!(r.params.rho2, 0.7);
        assert_eq!(r.sources["mu"], ValueSource::CliFlag);
        assert_eq!(r.sources["rho2"], ValueSource::ConfigFile);
        assert_eq!(r.sources["k1"], ValueSource::Default);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut r = ResolvedParams::from_defaults();
        match r.apply_key_values("rho9=1.0") {
            Err(ConfigError::UnknownKey { key, .. }) => assert_eq!(key, "rho9"),
            other => panic!("expected UnknownKey, got {other:?}"),
        }
        assert!(matches!(
            r.apply_key_values("just words"),
            Err(ConfigError::Malformed { .. })
        ));
        assert!(matches!(
            r.apply_key_values("mu=abc"),
            Err(ConfigError::BadValue { .. })
        ));
    }

    #[test]
    fn case_sensitive_keys() {
        let mut r = ResolvedParams::from_defaults();
        r.apply_key_values("k1=0.4\nK1=1.7").unwrap();
        assert_eq!(r.params.k1, 0.4);
        assert_eq!(r.params.K1, 1.7);
    }

    #[test]
    fn list_parsing() {
        let ns: Vec<u32> = parse_list("2, 3").unwrap();
        assert_eq!(ns, vec![2, 3]);
        let eps: Vec<f64> = parse_list("1e-2,5e-3,2.5e-3").unwrap();
        assert_eq!(eps.len(), 3);
        assert!(parse_list::<u32>("2,x").is_err());
    }
}
