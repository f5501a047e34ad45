//! Tiny `key = value` configuration reader used by the scenario and driver
//! files. Lines starting with `#` are comments; a line whose first token is
//! not followed by `=` is a directive (e.g. `segment 5 -2`).

use std::collections::BTreeMap;
use std::str::FromStr;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("key '{key}': cannot parse value '{value}'")]
    BadValue { key: String, value: String },

    #[error("unknown key '{0}'")]
    UnknownKey(String),

    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
    directives: Vec<(usize, String, Vec<String>)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut out = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some((k, v)) = line.split_once('=') {
                let key = k.trim();
                if key.is_empty() || key.contains(char::is_whitespace) {
                    return Err(ConfigError::Syntax {
                        line: n + 1,
                        message: format!("bad key '{key}'"),
                    });
                }
                if out.values.insert(key.to_string(), v.trim().to_string()).is_some() {
                    return Err(ConfigError::Syntax {
                        line: n + 1,
                        message: format!("duplicate key '{key}'"),
                    });
                }
            } else {
                let mut words = line.split_whitespace().map(str::to_string);
                let head = words.next().expect("non-empty line");
                out.directives.push((n + 1, head, words.collect()));
            }
        }
        Ok(out)
    }

    /// Removes and parses `key`, if present.
    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.values.remove(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: v,
            }),
        }
    }

    /// Removes a comma-separated list value.
    pub fn take_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        match self.values.remove(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|t| {
                    t.trim().parse().map_err(|_| ConfigError::BadValue {
                        key: key.to_string(),
                        value: v.clone(),
                    })
                })
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    /// Removes all directives named `name`, returning `(line, args)`.
    pub fn take_directives(&mut self, name: &str) -> Vec<(usize, Vec<String>)> {
        let (hit, rest): (Vec<_>, Vec<_>) = std::mem::take(&mut self.directives)
            .into_iter()
            .partition(|(_, head, _)| head == name);
        self.directives = rest;
        hit.into_iter().map(|(n, _, args)| (n, args)).collect()
    }

    /// Errors if anything was left unconsumed.
    pub fn finish(self) -> Result<(), ConfigError> {
        if let Some(k) = self.values.keys().next() {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        if let Some((line, head, _)) = self.directives.first() {
            return Err(ConfigError::Syntax {
                line: *line,
                message: format!("unknown directive '{head}'"),
            });
        }
        Ok(())
    }
}
