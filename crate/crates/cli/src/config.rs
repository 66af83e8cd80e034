//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are the long
//! flag names with `-` replaced by `_`. A value given on the command line
//! always wins over the file, and the file wins over built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;

use crate::failure::{Classify, Failure, Outcome};

pub const KNOWN_KEYS: &[&str] = &[
    "seed",
    "epochs",
    "batch_size",
    "learning_rate",
    "max_length",
    "holdout",
    "dropout",
    "epsilon",
    "positive_class_weight",
    "run_selection",
    "max_bridge_gap",
    "trim_boundary_punctuation",
    "merge",
    "strip_punctuation",
    "strip_rare",
    "strip_hashtags",
    "tie_policy",
    "include_pos",
    "dedup",
];

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct ConfigFile {
    source: String,
    values: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Outcome<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).or_usage(format!("cannot read config file {}", path.display()))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Outcome<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Failure::usage(format!("{source}:{}: expected `key = value`", i + 1)));
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Failure::usage(format!("{source}:{}: unknown key {key:?}", i + 1)));
            }
            if values.insert(key.to_string(), (i + 1, value.trim().to_string())).is_some() {
                return Err(Failure::usage(format!("{source}:{}: duplicate key {key:?}", i + 1)));
            }
        }
        Ok(Self {
            source: source.to_string(),
            values,
        })
    }

    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        debug_assert!(KNOWN_KEYS.contains(&key), "unregistered key {key}");
        self.values.get(key)
    }

    fn bad_value(&self, key: &str, line: usize, value: &str, expected: &str) -> Failure {
        Failure::usage(format!("{}:{line}: {key} = {value:?} is not {expected}", self.source))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Outcome<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, value)) => value
                .parse()
                .map(Some)
                .map_err(|_| self.bad_value(key, *line, value, "a valid value")),
        }
    }

    pub fn get_enum<T: ValueEnum>(&self, key: &str) -> Outcome<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, value)) => T::from_str(value, true).map(Some).map_err(|_| {
                let names: Vec<String> = T::value_variants()
                    .iter()
                    .filter_map(|v| v.to_possible_value().map(|p| p.get_name().to_string()))
                    .collect();
                self.bad_value(key, *line, value, &format!("one of {}", names.join(", ")))
            }),
        }
    }

    /// Flag, then file, then default.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Outcome<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    pub fn resolve_enum<T: ValueEnum>(&self, flag: Option<T>, key: &str, default: T) -> Outcome<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get_enum(key)?.unwrap_or(default)),
        }
    }

    /// A presence flag can only switch a setting on; otherwise the file decides.
    pub fn resolve_switch(&self, flag: bool, key: &str, default: bool) -> Outcome<bool> {
        if flag {
            Ok(true)
        } else {
            Ok(self.get(key)?.unwrap_or(default))
        }
    }
}
