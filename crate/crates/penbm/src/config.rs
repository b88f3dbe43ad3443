//! Flat key-value experiment configuration (INI-style, `key = value` lines,
//! `#` comments). Unknown keys are rejected so typos cannot silently fall
//! back to defaults.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: {message}")]
    BadValue { key: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Keys accepted in a verification config file.
const KNOWN_KEYS: &[&str] = &[
    "suite", "experiment", "region", "nu", "h", "t_ladder", "n", "m", "seed", "out", "ks_alpha", "z_threshold", "workers",
];

/// Parsed experiment configuration; unset keys stay `None` and the caller
/// applies its defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub suite: Option<String>,
    pub experiment: Option<String>,
    pub region: Option<String>,
    pub nu: Option<f64>,
    pub h: Option<f64>,
    pub t_ladder: Option<Vec<f64>>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub ks_alpha: Option<f64>,
    pub z_threshold: Option<f64>,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Malformed { line: idx + 1, text: raw.to_string() })?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey(key));
            }
            map.insert(key, value.trim().to_string());
        }
        let mut cfg = ExperimentConfig::default();
        for (key, value) in map {
            cfg.set(&key, &value)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            value.parse().map_err(|e| ConfigError::BadValue { key: key.to_string(), message: format!("{e}") })
        }
        match key {
            "suite" => self.suite = Some(value.to_string()),
            "experiment" => self.experiment = Some(value.to_string()),
            "region" => self.region = Some(value.to_string()),
            "out" => self.out = Some(value.to_string()),
            "nu" => self.nu = Some(num(key, value)?),
            "h" => self.h = Some(num(key, value)?),
            "ks_alpha" => {
                let v: f64 = num(key, value)?;
                if !(v > 0.0 && v < 1.0) {
                    return Err(ConfigError::BadValue { key: key.into(), message: "level must be in (0, 1)".into() });
                }
                self.ks_alpha = Some(v);
            }
            "z_threshold" => {
                let v: f64 = num(key, value)?;
                if !(v > 0.0) {
                    return Err(ConfigError::BadValue { key: key.into(), message: "threshold must be positive".into() });
                }
                self.z_threshold = Some(v);
            }
            "n" => self.n = Some(num(key, value)?),
            "m" => {
                let v: usize = num(key, value)?;
                if v < 2 {
                    return Err(ConfigError::BadValue { key: key.into(), message: "grid must have m >= 2".into() });
                }
                self.m = Some(v);
            }
            "seed" => self.seed = Some(num(key, value)?),
            "workers" => self.workers = Some(num(key, value)?),
            "t_ladder" => {
                let ladder: Result<Vec<f64>, _> = value.split(',').map(|tok| tok.trim().parse::<f64>()).collect();
                let ladder = ladder.map_err(|e| ConfigError::BadValue { key: key.into(), message: format!("{e}") })?;
                if ladder.is_empty() || ladder.iter().any(|&t| !(t > 0.0)) || ladder.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(ConfigError::BadValue {
                        key: key.into(),
                        message: "ladder must be increasing positive horizons".into(),
                    });
                }
                self.t_ladder = Some(ladder);
            }
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_keys_with_comments() {
        let cfg = ExperimentConfig::parse(
            "# comment\nsuite = identities\nseed = 7\nt_ladder = 25, 50, 100\nnu = -1.0\n  \n",
        )
        .unwrap();
        assert_eq!(cfg.suite.as_deref(), Some("identities"));
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.t_ladder, Some(vec![25.0, 50.0, 100.0]));
        assert_eq!(cfg.nu, Some(-1.0));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(ExperimentConfig::parse("sede = 7"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(ExperimentConfig::parse("just a line"), Err(ConfigError::Malformed { .. })));
        assert!(ExperimentConfig::parse("t_ladder = 50, 25").is_err());
        assert!(ExperimentConfig::parse("ks_alpha = 2.0").is_err());
        assert!(ExperimentConfig::parse("m = 1").is_err());
    }
}
