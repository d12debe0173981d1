//! Key-value config file for the CLI. TOML; keys are the long flag names
//! with dashes or underscores. Top-level keys apply to every subcommand, a
//! table named after a subcommand overrides them for that subcommand, and
//! command-line flags override both.
//!
//! ```toml
//! key_bits = 1024
//! [train]
//! construction = "secsh-gc"
//! tau = 50
//! ```

use super::HarnessError;
use serde::de::DeserializeOwned;
use std::path::Path;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    table: toml::Table,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e| HarnessError::Config(format!("config file: {e}")))?;
        Ok(Self { table })
    }

    fn raw(&self, command: &str, key: &str) -> Option<&toml::Value> {
        let keys = [key.replace('-', "_"), key.replace('_', "-")];
        let scoped = self.table.get(command).and_then(toml::Value::as_table);
        keys.iter()
            .find_map(|k| scoped.and_then(|t| t.get(k)))
            .or_else(|| {
                keys.iter()
                    .find_map(|k| self.table.get(k).filter(|v| !v.is_table()))
            })
    }

    /// The value for `key` under `command`, typed.
    pub fn get<T: DeserializeOwned>(&self, command: &str, key: &str) -> Result<Option<T>, HarnessError> {
        self.raw(command, key)
            .map(|v| {
                v.clone()
                    .try_into()
                    .map_err(|e| HarnessError::Config(format!("config key {key}: {e}")))
            })
            .transpose()
    }

    /// Like [`get`](Self::get) for values with a `FromStr` form, so
    /// "he-gc" works the same in the file as on the command line.
    pub fn get_parsed<T: std::str::FromStr>(&self, command: &str, key: &str) -> Result<Option<T>, HarnessError>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(command, key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => s
                .parse()
                .map(Some)
                .map_err(|e| HarnessError::Config(format!("config key {key}: {e}"))),
            Some(other) => other
                .to_string()
                .parse()
                .map(Some)
                .map_err(|e| HarnessError::Config(format!("config key {key}: {e}"))),
        }
    }
}
