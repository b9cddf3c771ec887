//! Flat `key = value` configuration text. `#` starts a comment; blank lines
//! are ignored; later keys override earlier ones.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Format(format!("config line {}: expected key = value", i + 1))
            })?;
            let key = k.trim().to_ascii_lowercase().replace('-', "_");
            if key.is_empty() {
                return Err(Error::Format(format!("config line {}: empty key", i + 1)));
            }
            entries.insert(key, (v.trim().to_string(), i + 1));
        }
        Ok(Self { entries })
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    /// Drops every key for which `keep` is false.
    pub fn retain(&mut self, mut keep: impl FnMut(&str) -> bool) {
        self.entries.retain(|k, _| keep(k));
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|_| {
                Error::Format(format!("config line {line}: cannot parse {key} = {v:?}"))
            }),
        }
    }

    /// A comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<T>().map_err(|_| {
                        Error::Format(format!("config line {line}: cannot parse {key} item {s:?}"))
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_lists_and_overrides() {
        let kv = KeyValues::parse("# header\nk = 3\nalpha=0.5 # trailing\n\nk = 9\nkinds = a, b ,c\n").unwrap();
        assert_eq!(kv.get::<usize>("k").unwrap(), Some(9));
        assert_eq!(kv.get::<f64>("alpha").unwrap(), Some(0.5));
        assert_eq!(
            kv.get_list::<String>("kinds").unwrap().unwrap(),
            vec!["a", "b", "c"]
        );
        assert_eq!(kv.get::<usize>("missing").unwrap(), None);
    }

    #[test]
    fn bad_lines_and_values() {
        assert!(KeyValues::parse("novalue\n").is_err());
        let kv = KeyValues::parse("k = x\n").unwrap();
        assert!(kv.get::<usize>("k").is_err());
    }
}
