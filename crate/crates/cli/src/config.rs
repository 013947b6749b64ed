//! Experiment config files.
//!
//! Plain `key = value` lines. `#` starts a comment. Keys before any section
//! header apply to every command that understands them; keys under a
//! `[command]` header apply to that command only. Unknown keys and
//! sections are rejected. Explicit flags always win over the file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

pub const COMMANDS: [(&str, &[&str]); 5] = [
    (
        "solve",
        &["formula", "level", "fan_in", "noise", "count_cap", "t_q", "t_k", "t_c"],
    ),
    ("bounds", &["n", "offsets", "eps", "format"]),
    (
        "sample",
        &[
            "formula",
            "level",
            "trials",
            "seed",
            "noise",
            "mode",
            "budget",
            "allow_high_level",
        ],
    ),
    (
        "nogo",
        &[
            "h",
            "trials",
            "control_trials",
            "seed",
            "h_cap",
            "monotone_tol",
            "identity_tol",
        ],
    ),
    (
        "resources",
        &["formula", "level", "fan_in", "t_q", "t_k", "t_c", "circuit"],
    ),
];

fn keys_for(command: &str) -> Option<&'static [&'static str]> {
    COMMANDS.iter().find(|(c, _)| *c == command).map(|(_, k)| *k)
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    global: BTreeMap<String, Entry>,
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if keys_for(name).is_none() {
                    bail!("line {line_no}: unknown section [{name}]");
                }
                cfg.sections.entry(name.to_string()).or_default();
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {line_no}: expected `key = value`"))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim().trim_matches('"').to_string();
            let known = match &section {
                Some(s) => keys_for(s).unwrap_or_default().contains(&key.as_str()),
                None => COMMANDS.iter().any(|(_, keys)| keys.contains(&key.as_str())),
            };
            if !known {
                let scope = section.as_deref().unwrap_or("any command");
                bail!("line {line_no}: unknown key `{key}` for {scope}");
            }
            let map = match &section {
                Some(s) => cfg.sections.get_mut(s).expect("section registered"),
                None => &mut cfg.global,
            };
            if map.insert(key.clone(), Entry { value, line: line_no }).is_some() {
                bail!("line {line_no}: duplicate key `{key}`");
            }
        }
        Ok(cfg)
    }

    /// Values visible to `command`: its section over the global keys it
    /// understands.
    pub fn settings(&self, command: &str) -> Settings {
        let keys = keys_for(command).unwrap_or_default();
        let mut values: BTreeMap<String, Entry> = self
            .global
            .iter()
            .filter(|(k, _)| keys.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        if let Some(section) = self.sections.get(command) {
            values.extend(section.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        Settings { values }
    }
}

/// Config values for one command.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, Entry>,
}

impl Settings {
    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|e| e.value.as_str())
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|err| anyhow!("config line {}: bad value for `{key}`: {err}", e.line)),
        }
    }

    /// Flag value if given, else the config value.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}
