//! The flat `key = value` text format shared by grid specs, model files and
//! experiment configs.
//!
//! One entry per line. Blank lines and lines starting with `#` are ignored.
//! Keys may appear at most once, and every key must be consumed by the reader
//! (see [`KvReader::finish`]), so typos surface as errors instead of being
//! silently dropped.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct KvWriter {
    out: String,
}

impl KvWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.out.push_str(key);
        self.out.push_str(" = ");
        self.out.push_str(&value.to_string());
        self.out.push('\n');
        self
    }

    pub fn comment(&mut self, text: &str) -> &mut Self {
        self.out.push_str("# ");
        self.out.push_str(text);
        self.out.push('\n');
        self
    }

    pub fn finish(self) -> String {
        self.out
    }
}

#[derive(Debug)]
pub struct KvReader {
    entries: BTreeMap<String, (usize, String)>,
}

impl KvReader {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::parse(line_no, "empty key"));
            }
            if entries
                .insert(key.to_string(), (line_no, value.trim().to_string()))
                .is_some()
            {
                return Err(Error::parse(line_no, format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { entries })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn take_str(&mut self, key: &str) -> Result<Option<(usize, String)>> {
        Ok(self.entries.remove(key))
    }

    pub fn require_str(&mut self, key: &str) -> Result<(usize, String)> {
        self.entries
            .remove(key)
            .ok_or_else(|| Error::parse(0, format!("missing key `{key}`")))
    }

    /// Removes and parses `key`, or returns `None` when absent.
    pub fn take<T>(&mut self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, value)) => value
                .parse()
                .map(Some)
                .map_err(|e| Error::parse(line, format!("bad value for `{key}`: {e}"))),
        }
    }

    pub fn require<T>(&mut self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.take(key)?
            .ok_or_else(|| Error::parse(0, format!("missing key `{key}`")))
    }

    /// Fails if any key was left unconsumed.
    pub fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((key, (line, _))) => Err(Error::parse(line, format!("unknown key `{key}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let mut kv = KvReader::parse("# hi\n\n a = 1 # one\nb=two\n").unwrap();
        assert_eq!(kv.require::<u32>("a").unwrap(), 1);
        assert_eq!(kv.require_str("b").unwrap().1, "two");
        kv.finish().unwrap();
    }

    #[test]
    fn rejects_duplicates_and_unknowns() {
        assert!(KvReader::parse("a = 1\na = 2\n").is_err());
        assert!(KvReader::parse("no separator\n").is_err());
        let kv = KvReader::parse("zzz = 1\n").unwrap();
        let err = kv.finish().unwrap_err().to_string();
        assert!(err.contains("zzz"), "{err}");
    }

    #[test]
    fn bad_value_names_key_and_line() {
        let mut kv = KvReader::parse("\nwidth = ten\n").unwrap();
        let err = kv.require::<usize>("width").unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("width"), "{err}");
    }
}
