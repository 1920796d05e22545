//! `key=value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Values given on the
//! command line win over the file, which wins over built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;

const KNOWN_KEYS: &[&str] = &[
    "t",
    "omega",
    "alpha",
    "x",
    "grid_min",
    "grid_max",
    "grid_n",
    "rel_tol",
    "max_m",
    "max_j",
    "seed",
    "n_paths",
    "n_steps",
    "bandwidth",
    "out",
];

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
            let k = k.trim();
            if !KNOWN_KEYS.contains(&k) {
                return Err(format!("config line {}: unknown key {k:?}", i + 1));
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| format!("config key {key}: cannot parse {v:?}"))
            })
            .transpose()
    }

    /// Flag value if given, else the file's, else `default`.
    pub fn pick<T: std::str::FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, String> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }
}
