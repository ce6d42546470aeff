//! Flat `key = value` scenario files with `[section]` headers.
//!
//! Keys are addressed as `section.key`. Keys before the first header live at
//! the top level. `#` and `;` start comments. Every key must be consumed by
//! the scenario that reads it, so typos surface as errors naming the key.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("key `{key}`: cannot parse `{value}` ({expected})")]
    InvalidValue { key: String, value: String, expected: String },
    #[error("key `{key}`: {message}")]
    OutOfRange { key: String, message: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("unknown key `{0}`")]
    Unknown(String),
    #[error("override `{0}` is not of the form section.key=value")]
    BadOverride(String),
}

impl ConfigError {
    pub fn key(&self) -> Option<&str> {
        match self {
            Self::InvalidValue { key, .. } | Self::OutOfRange { key, .. } | Self::Missing(key) | Self::Unknown(key) => {
                Some(key)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
    resolved: RefCell<BTreeMap<String, String>>,
}

impl PartialEq for Config {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl FromStr for Config {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut cfg = Config::default();
        let mut section = String::new();
        for (n, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: &str| ConfigError::Syntax { line: n + 1, message: message.to_owned() };
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| syntax("unterminated section header"))?.trim();
                if !valid_name(name) {
                    return Err(syntax("invalid section name"));
                }
                section = name.to_owned();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| syntax("expected key = value"))?;
            let key = key.trim();
            if !valid_name(key) {
                return Err(syntax("invalid key name"));
            }
            let full = if section.is_empty() { key.to_owned() } else { format!("{section}.{key}") };
            if cfg.entries.insert(full.clone(), value.trim().to_owned()).is_some() {
                return Err(syntax(&format!("duplicate key `{full}`")));
            }
        }
        Ok(cfg)
    }
}

fn strip_comment(line: &str) -> &str {
    line.find(['#', ';']).map_or(line, |i| &line[..i])
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl Config {
    /// Sets or replaces a key; used for command-line overrides.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_owned(), value.into());
    }

    /// Applies `section.key=value`.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (key, value) = spec.split_once('=').ok_or_else(|| ConfigError::BadOverride(spec.to_owned()))?;
        let key = key.trim();
        if key.is_empty() || !key.split('.').all(valid_name) {
            return Err(ConfigError::BadOverride(spec.to_owned()));
        }
        self.set(key, value.trim());
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        let v = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_owned());
        self.resolved.borrow_mut().insert(key.to_owned(), v.clone());
        Some(v)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| ConfigError::InvalidValue {
                    key: key.to_owned(),
                    value: v.to_owned(),
                    expected: std::any::type_name::<T>().rsplit("::").next().unwrap_or("value").to_owned(),
                })
            })
            .transpose()
    }

    /// Like `get`, recording the default as the effective value when absent.
    pub fn get_or<T: FromStr + Display>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.get(key)? {
            Some(v) => Ok(v),
            None => {
                self.resolved.borrow_mut().insert(key.to_owned(), default.to_string());
                Ok(default)
            }
        }
    }

    /// Records a derived effective value, e.g. a default list.
    pub fn note_default(&self, key: &str, value: impl Into<String>) {
        self.resolved.borrow_mut().entry(key.to_owned()).or_insert_with(|| value.into());
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        self.get(key)?.ok_or_else(|| ConfigError::Missing(key.to_owned()))
    }

    /// Comma-separated list of numbers.
    pub fn get_list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        v.split(',')
            .map(|item| {
                item.trim().parse::<f64>().map_err(|_| ConfigError::InvalidValue {
                    key: key.to_owned(),
                    value: v.to_owned(),
                    expected: "comma-separated numbers".into(),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    /// Fails on the first key that no reader asked for.
    pub fn ensure_consumed(&self) -> Result<(), ConfigError> {
        let used = self.used.borrow();
        match self.entries.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(ConfigError::Unknown(k.clone())),
            None => Ok(()),
        }
    }

    /// Canonical text form: top-level keys first, then sections in order.
    pub fn to_text(&self) -> String {
        render(&self.entries)
    }

    /// Every value read so far, defaults included, in canonical text form.
    /// Parsing it back reproduces the same run.
    pub fn resolved_text(&self) -> String {
        render(&self.resolved.borrow())
    }
}

fn render(entries: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    let mut current: Option<&str> = None;
    let (top, nested): (Vec<_>, Vec<_>) = entries.iter().partition(|(k, _)| !k.contains('.'));
    for (k, v) in top {
        out.push_str(&format!("{k} = {v}\n"));
    }
    for (k, v) in nested {
        let (section, key) = k.split_once('.').expect("nested key");
        if current != Some(section) {
            out.push_str(&format!("\n[{section}]\n"));
            current = Some(section);
        }
        out.push_str(&format!("{key} = {v}\n"));
    }
    out
}
