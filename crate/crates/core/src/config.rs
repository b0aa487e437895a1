//! Flat `key = value` configuration files.
//!
//! Lines starting with `#` and blank lines are ignored. Values may be wrapped
//! in double quotes to keep surrounding whitespace; inside quotes `\n`, `\t`,
//! `\"` and `\\` are unescaped. Keys are kebab-case and must be listed in
//! [`KNOWN_KEYS`], so one file can configure the model, dataset, schedule and
//! augmentation together.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

pub const MODEL_KEYS: &[&str] = &[
    "arch",
    "input-length",
    "alphabet",
    "truncation",
    "conv-frames",
    "kernels",
    "pools",
    "fc-units",
    "dropout",
    "init-stddev",
    "conv-bias",
    "seed",
];

pub const DATASET_KEYS: &[&str] = &[
    "classes",
    "fields",
    "concat-order",
    "reverse-text",
    "separator",
    "label-map",
    "drop-labels",
    "min-length",
    "max-length",
    "dedupe",
];

pub const TRAIN_KEYS: &[&str] = &[
    "batch-size",
    "momentum",
    "lr",
    "halve-every",
    "halvings",
    "epochs",
];

pub const AUGMENT_KEYS: &[&str] = &["p", "q"];

/// Every recognised key.
pub const KNOWN_KEYS: &[&[&str]] = &[MODEL_KEYS, DATASET_KEYS, TRAIN_KEYS, AUGMENT_KEYS];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(source: &str) -> Result<Self> {
        let mut kv = KeyValues::new();
        let mut seen_at: BTreeMap<String, usize> = BTreeMap::new();
        for (idx, line) in source.lines().enumerate() {
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {lineno}: expected `key = value`, got {trimmed:?}"))
            })?;
            let key = key.trim().to_string();
            if let Some(prev) = seen_at.insert(key.clone(), lineno) {
                return Err(Error::Config(format!(
                    "key `{key}` set twice (lines {prev} and {lineno})"
                )));
            }
            let value = unquote(value.trim())
                .map_err(|msg| Error::Config(format!("line {lineno}: {msg}")))?;
            kv.set(&key, value)?;
        }
        Ok(kv)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let source = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&source)
    }

    /// Sets (or overrides) a key. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KNOWN_KEYS.iter().any(|group| group.contains(&key)) {
            return Err(Error::Config(format!("unknown configuration key `{key}`")));
        }
        self.entries.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Config(format!("`{key}` = {v:?}: {e}")))
            })
            .transpose()
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                split_list(v)
                    .map(|item| {
                        item.parse::<T>()
                            .map_err(|e| Error::Config(format!("`{key}` item {item:?}: {e}")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn flag(&self, key: &str) -> Result<Option<bool>> {
        self.get(key)
            .map(|v| match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(true),
                "false" | "no" | "0" | "off" => Ok(false),
                _ => Err(Error::Config(format!("`{key}` = {v:?} is not a boolean"))),
            })
            .transpose()
    }
}

/// Splits on commas, trimming items and dropping empty ones.
pub fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn unquote(value: &str) -> std::result::Result<String, String> {
    let Some(inner) = value.strip_prefix('"') else {
        return Ok(value.to_string());
    };
    let inner = inner
        .strip_suffix('"')
        .ok_or_else(|| "unterminated quoted value".to_string())?;
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('"') => out.push('"'),
            Some('\\') => out.push('\\'),
            other => return Err(format!("bad escape \\{}", other.map_or(String::new(), String::from))),
        }
    }
    Ok(out)
}
