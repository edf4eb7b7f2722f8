//! Run settings with flags > environment > config file > defaults.
//!
//! The config file is a flat `key = value` document; environment overrides
//! use the `MUTENT_` prefix with the key upper-cased (`MUTENT_JOBS=4`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mutent::entropy::LogBase;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Matrix,
    Group,
}

impl RunMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::Matrix => "matrix",
            RunMode::Group => "group",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSettings {
    pub mode: RunMode,
    pub jobs: usize,
    pub timeout_factor: f64,
    pub min_timeout: f64,
    pub order: usize,
    pub cap: usize,
    pub seed: u64,
    pub log_base: LogBase,
    pub discover: String,
    pub run: String,
    pub sources: Vec<String>,
    pub language: String,
    pub env_allow: Vec<String>,
    pub capture_limit: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            mode: RunMode::Matrix,
            jobs: 1,
            timeout_factor: 5.0,
            min_timeout: 0.25,
            order: 1,
            cap: 500,
            seed: 0,
            log_base: LogBase::E,
            discover: String::new(),
            run: String::new(),
            sources: Vec::new(),
            language: "toy".to_string(),
            env_allow: Vec::new(),
            capture_limit: 8 * 1024,
        }
    }
}

pub fn parse_flat_file(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

pub fn parse_log_base(s: &str) -> Result<LogBase, String> {
    match s {
        "e" => Ok(LogBase::E),
        "2" => Ok(LogBase::Two),
        other => Err(format!("log base must be `2` or `e`, got `{other}`")),
    }
}

pub fn parse_mode(s: &str) -> Result<RunMode, String> {
    match s {
        "matrix" => Ok(RunMode::Matrix),
        "group" => Ok(RunMode::Group),
        other => Err(format!("mode must be `matrix` or `group`, got `{other}`")),
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(String::from)
        .collect()
}

impl RunSettings {
    /// Layer a flat key/value map (config file or env) over the settings.
    pub fn apply(&mut self, map: &BTreeMap<String, String>) -> Result<(), String> {
        let parse_err = |key: &str, v: &str| format!("bad value for `{key}`: `{v}`");
        for (key, value) in map {
            match key.as_str() {
                "mode" => self.mode = parse_mode(value)?,
                "jobs" => self.jobs = value.parse().map_err(|_| parse_err(key, value))?,
                "timeout_factor" => {
                    self.timeout_factor = value.parse().map_err(|_| parse_err(key, value))?
                }
                "min_timeout" => {
                    self.min_timeout = value.parse().map_err(|_| parse_err(key, value))?
                }
                "order" => self.order = value.parse().map_err(|_| parse_err(key, value))?,
                "cap" => self.cap = value.parse().map_err(|_| parse_err(key, value))?,
                "seed" => self.seed = value.parse().map_err(|_| parse_err(key, value))?,
                "log_base" => self.log_base = parse_log_base(value)?,
                "discover" => self.discover = value.clone(),
                "run" => self.run = value.clone(),
                "sources" => self.sources = split_list(value),
                "language" => self.language = value.clone(),
                "env_allow" => self.env_allow = split_list(value),
                "capture_limit" => {
                    self.capture_limit = value.parse().map_err(|_| parse_err(key, value))?
                }
                other => return Err(format!("unknown config key `{other}`")),
            }
        }
        Ok(())
    }

    pub fn apply_env(&mut self) -> Result<(), String> {
        let keys = [
            "mode",
            "jobs",
            "timeout_factor",
            "min_timeout",
            "order",
            "cap",
            "seed",
            "log_base",
            "discover",
            "run",
            "sources",
            "language",
            "env_allow",
            "capture_limit",
        ];
        let mut map = BTreeMap::new();
        for key in keys {
            let env_key = format!("MUTENT_{}", key.to_uppercase());
            if let Ok(value) = std::env::var(&env_key) {
                map.insert(key.to_string(), value);
            }
        }
        self.apply(&map)
    }

    pub fn load(project: &Path, config_path: Option<&Path>) -> Result<RunSettings, String> {
        let mut settings = RunSettings::default();
        let file = config_path
            .map(PathBuf::from)
            .unwrap_or_else(|| project.join("mutent.conf"));
        if file.exists() {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| format!("cannot read {}: {e}", file.display()))?;
            settings.apply(&parse_flat_file(&text)?)?;
        } else if config_path.is_some() {
            return Err(format!("config file {} not found", file.display()));
        }
        settings.apply_env()?;
        Ok(settings)
    }

    /// The part of the configuration that must not change across a resumed
    /// session: it determines the mutant set and the plan.
    pub fn session_snapshot(&self) -> serde_json::Value {
        serde_json::json!({
            "mode": self.mode.as_str(),
            "order": self.order,
            "cap": self.cap,
            "seed": self.seed,
            "sources": self.sources,
            "language": self.language,
            "discover": self.discover,
            "run": self.run,
            "timeout_factor": self.timeout_factor,
        })
    }
}
