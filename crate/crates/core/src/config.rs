//! Run configuration: defaults, flat `key = value` files and overrides.
//!
//! Layers are merged lowest first: defaults, config file, environment,
//! command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::metric::{EvalMode, HeadChoice, MetricConfig};
use crate::scorer::{RemoteConfig, ScorerKind, ScorerSpec, DEFAULT_SMOOTHING};
use crate::segment::{TokenCounter, DEFAULT_CHUNK_BUDGET, DEFAULT_INFLATION};

/// Environment variable overriding the remote scorer endpoint.
pub const ENDPOINT_ENV: &str = "ALIGNSCORE_ENDPOINT";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("invalid value for {key}: {message}")]
    Value { key: String, message: String },
    #[error("{0}")]
    Missing(String),
}

fn value_err(key: &str, message: impl ToString) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.to_string(),
    }
}

/// A partial configuration; unset fields fall through to lower layers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub scorer: Option<ScorerKind>,
    pub endpoint: Option<String>,
    pub fixture: Option<PathBuf>,
    pub smoothing: Option<f64>,
    pub timeout_ms: Option<u64>,
    pub batch_size: Option<usize>,
    pub max_in_flight: Option<usize>,
    pub head: Option<HeadChoice>,
    pub mode: Option<EvalMode>,
    pub chunk_budget: Option<usize>,
    pub inflation: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

impl Settings {
    /// Fields set in `higher` replace those in `self`.
    pub fn overlay(self, higher: Settings) -> Settings {
        Settings {
            scorer: higher.scorer.or(self.scorer),
            endpoint: higher.endpoint.or(self.endpoint),
            fixture: higher.fixture.or(self.fixture),
            smoothing: higher.smoothing.or(self.smoothing),
            timeout_ms: higher.timeout_ms.or(self.timeout_ms),
            batch_size: higher.batch_size.or(self.batch_size),
            max_in_flight: higher.max_in_flight.or(self.max_in_flight),
            head: higher.head.or(self.head),
            mode: higher.mode.or(self.mode),
            chunk_budget: higher.chunk_budget.or(self.chunk_budget),
            inflation: higher.inflation.or(self.inflation),
            seed: higher.seed.or(self.seed),
            workers: higher.workers.or(self.workers),
        }
    }

    /// Parses `key = value` lines; `#` starts a comment. Relative fixture
    /// paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Settings, ConfigError> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| value_err(&format!("line {}", i + 1), "expected key = value"))?;
            let (key, value) = (key.trim().replace('-', "_"), value.trim());
            s.set(&key, value, base)?;
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Settings, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::File {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Settings::parse(&text, base).map_err(|e| ConfigError::File {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Reads [`ENDPOINT_ENV`] when set and non-empty.
    pub fn from_env() -> Settings {
        Settings {
            endpoint: std::env::var(ENDPOINT_ENV)
                .ok()
                .filter(|v| !v.trim().is_empty()),
            ..Settings::default()
        }
    }

    fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), ConfigError> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            value.parse().map_err(|e: T::Err| value_err(key, e))
        }
        match key {
            "scorer" => {
                self.scorer = Some(match value {
                    "fixture" => ScorerKind::Fixture,
                    "lexical" => ScorerKind::Lexical,
                    "remote" => ScorerKind::Remote,
                    other => return Err(value_err(key, format!("unknown scorer {other:?}"))),
                })
            }
            "endpoint" => self.endpoint = Some(value.to_string()),
            "fixture" => self.fixture = Some(base.join(value)),
            "smoothing" => self.smoothing = Some(num(key, value)?),
            "timeout_ms" => self.timeout_ms = Some(num(key, value)?),
            "batch_size" => self.batch_size = Some(num(key, value)?),
            "max_in_flight" => self.max_in_flight = Some(num(key, value)?),
            "head" => self.head = Some(value.parse().map_err(|e| value_err(key, e))?),
            "mode" => self.mode = Some(value.parse().map_err(|e| value_err(key, e))?),
            "chunk_budget" => self.chunk_budget = Some(num(key, value)?),
            "inflation" => self.inflation = Some(num(key, value)?),
            "seed" => self.seed = Some(num(key, value)?),
            "workers" => self.workers = Some(num(key, value)?),
            other => return Err(value_err(other, "unknown key")),
        }
        Ok(())
    }

    /// Applies defaults and validates every field.
    pub fn resolve(self) -> Result<RunConfig, ConfigError> {
        let remote_defaults = RemoteConfig::default();
        let scorer = match self.scorer.unwrap_or(ScorerKind::Lexical) {
            ScorerKind::Fixture => ScorerSpec::Fixture {
                table: self.fixture.ok_or_else(|| {
                    ConfigError::Missing("the fixture scorer needs a fixture table".into())
                })?,
            },
            ScorerKind::Lexical => {
                let smoothing = self.smoothing.unwrap_or(DEFAULT_SMOOTHING);
                if !(smoothing > 0.0 && smoothing < 0.5) {
                    return Err(value_err("smoothing", "must be in (0, 0.5)"));
                }
                ScorerSpec::Lexical { smoothing }
            }
            ScorerKind::Remote => {
                let batch_size = self.batch_size.unwrap_or(remote_defaults.batch_size);
                let max_in_flight = self.max_in_flight.unwrap_or(remote_defaults.max_in_flight);
                let timeout_ms = self
                    .timeout_ms
                    .unwrap_or(remote_defaults.timeout.as_millis() as u64);
                for (key, v) in [
                    ("batch_size", batch_size as u64),
                    ("max_in_flight", max_in_flight as u64),
                    ("timeout_ms", timeout_ms),
                ] {
                    if v == 0 {
                        return Err(value_err(key, "must be >= 1"));
                    }
                }
                ScorerSpec::Remote {
                    endpoint: self.endpoint.unwrap_or(remote_defaults.endpoint),
                    timeout_ms,
                    batch_size,
                    max_in_flight,
                }
            }
        };
        let chunk_budget = self.chunk_budget.unwrap_or(DEFAULT_CHUNK_BUDGET);
        if chunk_budget == 0 {
            return Err(value_err("chunk_budget", "must be >= 1"));
        }
        let counter = TokenCounter::new(self.inflation.unwrap_or(DEFAULT_INFLATION))
            .map_err(|e| value_err("inflation", e))?;
        let workers = self.workers.unwrap_or(1);
        if workers == 0 {
            return Err(value_err("workers", "must be >= 1"));
        }
        Ok(RunConfig {
            scorer,
            head: self.head.unwrap_or_default(),
            mode: self.mode.unwrap_or_default(),
            chunk_budget,
            inflation: counter.inflation(),
            seed: self.seed.unwrap_or(0),
            workers,
        })
    }
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scorer: ScorerSpec,
    pub head: HeadChoice,
    pub mode: EvalMode,
    pub chunk_budget: usize,
    pub inflation: f64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Settings::default().resolve().expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn metric(&self) -> MetricConfig {
        MetricConfig {
            head: self.head,
            mode: self.mode,
            chunk_budget: self.chunk_budget,
            counter: TokenCounter::new(self.inflation).expect("validated on resolve"),
        }
    }
}
