//! Experiment configuration and its JSON form.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::AttackModel;
use crate::postprocess::EfficiencyConvention;
use crate::protocol::ProtocolKind;

pub const DEFAULT_THRESHOLD: f64 = 0.02;
pub const DEFAULT_DISCLOSURE_FRACTION: f64 = 0.5;

/// Environment variable that overrides the seed in a config file.
pub const SEED_ENV: &str = "MASQKD_SEED";

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn default_disclosure() -> f64 {
    DEFAULT_DISCLOSURE_FRACTION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: ProtocolKind,
    /// Key-size parameter; the run has `8n` rounds.
    pub n: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<AttackModel>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_disclosure")]
    pub disclosure_fraction: f64,
    #[serde(default)]
    pub efficiency_convention: EfficiencyConvention,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid configuration: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("invalid {SEED_ENV} value `{0}`")]
    SeedEnv(String),
}

impl From<serde_json::Error> for ConfigError {
    fn from(e: serde_json::Error) -> Self {
        ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

impl ExperimentConfig {
    /// Config with every optional field at its default.
    pub fn new(protocol: ProtocolKind, n: u64, seed: u64) -> Self {
        Self {
            protocol,
            n,
            seed,
            attack: None,
            threshold: DEFAULT_THRESHOLD,
            disclosure_fraction: DEFAULT_DISCLOSURE_FRACTION,
            efficiency_convention: EfficiencyConvention::default(),
            output_path: None,
        }
    }

    pub fn with_attack(mut self, attack: AttackModel) -> Self {
        self.attack = Some(attack);
        self
    }

    pub fn rounds(&self) -> u64 {
        self.n * 8
    }

    pub fn attack_or_none(&self) -> AttackModel {
        self.attack.clone().unwrap_or_else(AttackModel::none)
    }

    /// Lists every constraint the config violates.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        if self.n == 0 {
            problems.push("n must be at least 1".to_string());
        }
        if self.n.checked_mul(8).is_none() {
            problems.push("8n overflows".to_string());
        }
        if !self.threshold.is_finite() || !(0.0..=1.0).contains(&self.threshold) {
            problems.push(format!("threshold {} is outside [0, 1]", self.threshold));
        }
        if !self.disclosure_fraction.is_finite() || !(0.0..=1.0).contains(&self.disclosure_fraction) {
            problems.push(format!(
                "disclosure_fraction {} is outside [0, 1]",
                self.disclosure_fraction
            ));
        }
        if let Some(attack) = &self.attack {
            if let Err(violations) = attack.validate(self.protocol) {
                problems.extend(violations.iter().map(|v| format!("attack: {v}")));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(problems))
        }
    }

    /// Parses and validates a JSON config.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Parses and validates an already-decoded JSON value.
    pub fn from_value(value: serde_json::Value) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = serde_json::from_value(value)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} n={} seed={}", self.protocol, self.n, self.seed)
    }
}

/// Reads, parses and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ExperimentConfig::from_json(&text)
}

/// Seed precedence: explicit flag, then [`SEED_ENV`], then the file.
pub fn resolve_seed(file_seed: u64, flag: Option<u64>, env: Option<&str>) -> Result<u64, ConfigError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match env {
        Some(raw) => raw.trim().parse().map_err(|_| ConfigError::SeedEnv(raw.to_string())),
        None => Ok(file_seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let c = ExperimentConfig::from_json(r#"{"protocol": "base", "n": 100, "seed": 1}"#).unwrap();
        assert_eq!(c, ExperimentConfig::new(ProtocolKind::Base, 100, 1));
        assert_eq!(c.threshold, 0.02);
        assert_eq!(c.disclosure_fraction, 0.5);
        assert_eq!(c.efficiency_convention, EfficiencyConvention::FinalOverPrepared);
    }

    #[test]
    fn out_of_range_fraction_is_rejected() {
        let err =
            ExperimentConfig::from_json(r#"{"protocol": "base", "n": 100, "seed": 1, "disclosure_fraction": 1.5}"#)
                .unwrap_err();
        let ConfigError::Invalid(problems) = err else {
            panic!("{err}")
        };
        assert!(problems[0].contains("disclosure_fraction"));
    }

    #[test]
    fn bad_s2_norm_lists_residual() {
        let text = r#"{
  "protocol": "base", "n": 10, "seed": 1,
  "attack": {"kind": "collective_s2", "location": "alice_to_bob", "params": {
    "v0": [[1,0],[0,0],[0,0],[0,0]], "v1": [[1,0],[0,0],[0,0],[0,0]],
    "w0": [[0,0],[0,0],[0,0],[0,0]], "w1": [[0,0],[1,0],[0,0],[0,0]]}}
}"#;
        let ConfigError::Invalid(problems) = ExperimentConfig::from_json(text).unwrap_err() else {
            panic!()
        };
        assert!(problems
            .iter()
            .any(|p| p.contains("‖v0‖² + ‖v1‖² = 1") && p.contains("residual 1.000e0")));
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = ExperimentConfig::from_json("{\n  \"protocol\": \"base\",\n  \"n\": oops\n}").unwrap_err();
        let ConfigError::Parse { line, .. } = err else {
            panic!("{err}")
        };
        assert_eq!(line, 3);
    }

    #[test]
    fn emit_then_load_round_trips() {
        let mut c = ExperimentConfig::new(ProtocolKind::Improved, 7, 99).with_attack(AttackModel::s1_theta(0.3));
        c.threshold = 0.1;
        c.output_path = Some("out.json".into());
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(1, Some(3), Some("2")).unwrap(), 3);
        assert_eq!(resolve_seed(1, None, Some("2")).unwrap(), 2);
        assert_eq!(resolve_seed(1, None, None).unwrap(), 1);
        assert!(resolve_seed(1, None, Some("x")).is_err());
    }
}
