//! Flat key=value config files mirroring the long CLI flags. Values from a
//! file fill in whatever the command line left unset; explicit flags always
//! win.

use anyhow::{bail, Context, Result};
use std::collections::HashMap;
use std::path::Path;

#[derive(Default)]
pub struct Overrides {
    map: HashMap<String, String>,
}

impl Overrides {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Overrides::default());
        };
        let text =
            std::fs::read_to_string(path).with_context(|| format!("read config {path:?}"))?;
        let mut map = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    map.insert(k.trim().to_string(), v.trim().to_string());
                }
                None => bail!("config line {} is not key=value: {line:?}", lineno + 1),
            }
        }
        Ok(Overrides { map })
    }

    pub fn raw(&self, key: &str) -> Option<String> {
        self.map.get(key).cloned()
    }

    pub fn flag(&self, key: &str) -> bool {
        matches!(
            self.map.get(key).map(String::as_str),
            Some("true") | Some("1") | Some("yes")
        )
    }

    /// Required string: flag value, else config value.
    pub fn string(&self, key: &str, flag: Option<String>) -> Result<String> {
        flag.or_else(|| self.raw(key))
            .with_context(|| format!("missing required option --{key}"))
    }

    pub fn string_or(&self, key: &str, flag: Option<String>, default: &str) -> String {
        flag.or_else(|| self.raw(key))
            .unwrap_or_else(|| default.to_string())
    }

    /// Parsed value with explicit flag taking precedence, then the config
    /// file, then the default (when given).
    pub fn parsed<T: std::str::FromStr>(
        &self,
        key: &str,
        flag: Option<T>,
        default: Option<T>,
    ) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        if let Some(raw) = self.map.get(key) {
            return raw
                .parse()
                .map_err(|e| anyhow::anyhow!("config {key}={raw}: {e}"));
        }
        default.with_context(|| format!("missing required option --{key}"))
    }

    pub fn parsed_opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config {key}={raw}: {e}")),
        }
    }
}
