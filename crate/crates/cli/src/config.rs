//! Flat `key = value` configuration files.
//!
//! Blank lines and everything after `#` are ignored. Keys are the long flag
//! names of the subcommand (`alpha`, `lambda`, `dt`, ...). A key the
//! subcommand does not know is an error. Flags given on the command line
//! take precedence over the file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

use crate::exit::UsageError;

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(UsageError(format!("line {}: expected key=value, got {raw:?}", lineno + 1)));
            };
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                bail!(UsageError(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                bail!(UsageError(format!("line {}: duplicate key {key}", lineno + 1)));
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reject keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        let unknown: Vec<&str> = self
            .entries
            .keys()
            .map(String::as_str)
            .filter(|k| !allowed.contains(k))
            .collect();
        if !unknown.is_empty() {
            bail!(UsageError(format!(
                "unknown config key(s): {}; accepted keys are {}",
                unknown.join(", "),
                allowed.join(", ")
            )));
        }
        Ok(())
    }

    /// The flag value if present, otherwise the parsed file value.
    pub fn merge<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| UsageError(format!("config key {key}: cannot parse {raw:?}: {e}")).into()),
        }
    }

    pub fn merge_or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.merge(flag, key)?.unwrap_or(default))
    }
}

/// Comma-separated list of numbers, e.g. `0.1,0.01`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberList(pub Vec<f64>);

impl FromStr for NumberList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(NumberList)
    }
}
