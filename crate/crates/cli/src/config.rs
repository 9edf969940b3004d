//! Run settings gathered from an optional `key = value` file and command-line
//! flags, with flags taking precedence.

use anyhow::{anyhow, bail, Context, Result};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

/// Error for invalid user input; mapped to the usage exit code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    flags: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
    consumed: BTreeSet<String>,
}

impl Settings {
    /// Reads a config file: `key = value` lines, `#` comments, blank lines
    /// ignored. A `manifest.json` from an earlier run is accepted as well;
    /// its recorded configuration is replayed.
    pub fn load(path: Option<&Path>, command: &str) -> Result<Self> {
        let mut settings = Self::default();
        let Some(path) = path else {
            return Ok(settings);
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        if text.trim_start().starts_with('{') {
            let manifest: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("parsing manifest {}", path.display()))?;
            if let Some(c) = manifest.get("command").and_then(|c| c.as_str()) {
                if c != command {
                    bail!(usage(format!(
                        "manifest {} records command '{c}', not '{command}'",
                        path.display()
                    )));
                }
            }
            let config = manifest
                .get("config")
                .and_then(|c| c.as_object())
                .ok_or_else(|| usage(format!("{} has no config object", path.display())))?;
            for (k, v) in config {
                let v = match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                settings.file.insert(normalize(k), v);
            }
            return Ok(settings);
        }
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                usage(format!(
                    "{}:{}: expected 'key = value'",
                    path.display(),
                    no + 1
                ))
            })?;
            settings.file.insert(normalize(k), v.trim().to_string());
        }
        Ok(settings)
    }

    /// Records a flag value given on the command line.
    pub fn flag<T: Display>(&mut self, key: &str, value: Option<T>) -> &mut Self {
        if let Some(v) = value {
            self.flags.insert(normalize(key), v.to_string());
        }
        self
    }

    fn raw(&mut self, key: &str) -> Option<String> {
        self.consumed.insert(key.to_string());
        self.flags.get(key).or_else(|| self.file.get(key)).cloned()
    }

    pub fn get<T>(&mut self, key: &str, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match self.raw(key) {
            Some(s) => s
                .parse::<T>()
                .map_err(|e| usage(format!("invalid value '{s}' for {key}: {e}")))?,
            None => default,
        };
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    pub fn get_opt<T>(&mut self, key: &str) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let Some(s) = self.raw(key) else {
            return Ok(None);
        };
        let value = s
            .parse::<T>()
            .map_err(|e| usage(format!("invalid value '{s}' for {key}: {e}")))?;
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(Some(value))
    }

    pub fn require<T>(&mut self, key: &str) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.get_opt(key)?
            .ok_or_else(|| usage(format!("missing required setting '{key}'")))
    }

    /// Comma-separated list.
    pub fn get_list<T>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let Some(s) = self.raw(key) else {
            return Ok(None);
        };
        let items = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<T>()
                    .map_err(|e| usage(format!("invalid entry '{}' in {key}: {e}", p.trim())))
            })
            .collect::<Result<Vec<T>>>()?;
        self.resolved.insert(key.to_string(), s.replace(' ', ""));
        Ok(Some(items))
    }

    /// Fails on config-file keys no setting asked for.
    pub fn finish(self) -> Result<BTreeMap<String, String>> {
        let unknown: Vec<&String> = self
            .file
            .keys()
            .chain(self.flags.keys())
            .filter(|k| !self.consumed.contains(*k))
            .collect();
        if !unknown.is_empty() {
            return Err(anyhow!(usage(format!("unknown setting(s): {unknown:?}"))));
        }
        Ok(self.resolved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flags_override_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# run\nseed = 4\nburn_in = 10\n\niterations=50 # short").unwrap();
        let mut s = Settings::load(Some(f.path()), "fit").unwrap();
        s.flag("seed", Some(9u64));
        assert_eq!(s.get("seed", 1u64).unwrap(), 9);
        assert_eq!(s.get("burn-in", 0usize).unwrap(), 10);
        assert_eq!(s.get("iterations", 0usize).unwrap(), 50);
        assert_eq!(s.get("thin", 1usize).unwrap(), 1);
        let echo = s.finish().unwrap();
        assert_eq!(echo["seed"], "9");
        assert_eq!(echo["thin"], "1");
    }

    #[test]
    fn unknown_and_malformed_keys() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "sede = 4").unwrap();
        let s = Settings::load(Some(f.path()), "fit").unwrap();
        assert!(s.finish().is_err());
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "seed 4").unwrap();
        assert!(Settings::load(Some(f.path()), "fit").is_err());
        let mut s = Settings::default();
        s.flag("n", Some("ten"));
        assert!(s.get("n", 1usize).is_err());
    }

    #[test]
    fn manifest_replay() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(
            f,
            r#"{{"command": "simulate", "config": {{"k": "12", "seed": "3"}}}}"#
        )
        .unwrap();
        let mut s = Settings::load(Some(f.path()), "simulate").unwrap();
        assert_eq!(s.get("k", 0usize).unwrap(), 12);
        assert!(Settings::load(Some(f.path()), "fit").is_err());
    }

    #[test]
    fn lists() {
        let mut s = Settings::default();
        s.flag("sizes", Some("8, 7,3,9"));
        assert_eq!(
            s.get_list::<usize>("sizes").unwrap(),
            Some(vec![8, 7, 3, 9])
        );
        assert_eq!(s.finish().unwrap()["sizes"], "8,7,3,9");
    }
}
