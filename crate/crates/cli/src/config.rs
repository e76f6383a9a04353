//! Plain-text `key=value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the flag
//! spelling without the leading dashes; `_` and `-` are interchangeable.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

pub const KEYS: [&str; 8] = [
    "mu",
    "loss-ratio",
    "gamma2-filter",
    "gamma2-gate",
    "eta",
    "dark",
    "grid",
    "workers",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config line {}: expected key=value",
                    lineno + 1
                )));
            };
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key '{key}'",
                    lineno + 1
                )));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::Usage(format!("config key '{key}': {e}")))
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_aliases() {
        let c = ConfigFile::parse("# comment\n\nmu = 2.5\nloss_ratio=1e-2\n").unwrap();
        assert_eq!(c.get("mu"), Some("2.5"));
        assert_eq!(c.parsed::<f64>("loss-ratio").unwrap(), Some(1e-2));
        assert_eq!(c.parsed::<f64>("eta").unwrap(), None);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(ConfigFile::parse("mu 2"), Err(CliError::Usage(_))));
        assert!(matches!(
            ConfigFile::parse("colour=red"),
            Err(CliError::Usage(_))
        ));
        let c = ConfigFile::parse("mu=abc").unwrap();
        assert!(c.parsed::<f64>("mu").is_err());
    }
}
