//! Experiment configuration: a TOML file with `[generator]` and `[detector]`
//! sections, layered with `BEAMWATCH_*` environment variables and dotted
//! `--set key=value` overrides (file < environment < overrides).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::DetectorConfig;
use crate::synth::GeneratorConfig;

/// Environment variables `BEAMWATCH_<KEY>` override config keys; `__`
/// separates nesting levels (`BEAMWATCH_DETECTOR__TAU=0.2` sets
/// `detector.tau`).
pub const ENV_PREFIX: &str = "BEAMWATCH_";

/// Top-level experiment settings. `seed` and `window`, when present,
/// propagate into both sections so one knob controls the whole experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Experiment-wide seed; overrides the per-section seeds when set.
    pub seed: Option<u64>,
    /// Window length `k`; overrides the per-section windows when set.
    pub window: Option<usize>,
    pub generator: GeneratorConfig,
    pub detector: DetectorConfig,
}

impl ExperimentConfig {
    /// Loads a config: optional TOML file, then environment, then `--set`
    /// overrides. Top-level `seed`/`window` are pushed down into the
    /// sections before validation.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::io(p.display().to_string(), e))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::InvalidConfig(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };

        let mut env_pairs: Vec<(String, String)> = std::env::vars()
            .filter_map(|(k, v)| {
                k.strip_prefix(ENV_PREFIX)
                    .map(|rest| (rest.to_ascii_lowercase().replace("__", "."), v))
            })
            .collect();
        env_pairs.sort();
        for (key, raw) in &env_pairs {
            set_dotted(&mut table, key, parse_scalar(raw))?;
        }

        for ov in overrides {
            let (key, raw) = ov.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("override `{ov}` is not of the form key=value"))
            })?;
            set_dotted(&mut table, key.trim(), parse_scalar(raw.trim()))?;
        }

        let cfg: ExperimentConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let cfg = cfg.normalized();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Pushes top-level `seed`/`window` down into the sections.
    pub fn normalized(mut self) -> Self {
        if let Some(seed) = self.seed {
            self.generator.seed = seed;
            self.detector.seed = seed;
        }
        if let Some(window) = self.window {
            self.generator.window = window;
            self.detector.window = window;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        if self.detector.window != self.generator.window {
            return Err(Error::InvalidConfig(format!(
                "generator.window ({}) and detector.window ({}) must agree",
                self.generator.window, self.detector.window
            )));
        }
        if !(self.detector.tau > 0.0 && self.detector.tau <= 0.5) {
            return Err(Error::InvalidConfig(format!(
                "detector.tau must be in (0, 0.5], got {}",
                self.detector.tau
            )));
        }
        self.detector.ae.validate(self.detector.window)?;
        Ok(())
    }
}

/// Best-effort scalar parsing for override values: integer, float, bool,
/// otherwise a string.
fn parse_scalar(raw: &str) -> toml::Value {
    if let Ok(i) = raw.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return toml::Value::Float(f);
    }
    if let Ok(b) = raw.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    toml::Value::String(raw.to_string())
}

/// Sets `a.b.c = value` in a nested TOML table, creating intermediate tables.
fn set_dotted(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let mut segments = path.split('.').peekable();
    let mut current = table;
    loop {
        let seg = segments
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::InvalidConfig(format!("bad override key `{path}`")))?;
        if segments.peek().is_none() {
            current.insert(seg.to_string(), value);
            return Ok(());
        }
        current = current
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| {
                Error::InvalidConfig(format!("`{seg}` in `{path}` is not a table"))
            })?;
    }
}
