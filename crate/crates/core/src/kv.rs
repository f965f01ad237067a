//! Flat `key = value` text files with dotted keys.
//!
//! The syntax is a subset of TOML, so files are read with the `toml` parser
//! and nested tables are flattened back into dotted keys.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;
use toml::Value;

#[derive(Debug, Error)]
pub enum KvError {
    #[error("syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("key `{key}`: expected {expected}")]
    Type { key: String, expected: &'static str },
    #[error("unknown key `{0}`")]
    Unknown(String),
}

/// Parsed flat map.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Kv {
    entries: BTreeMap<String, Value>,
}

fn flatten_into(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten_into(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

impl Kv {
    pub fn parse(text: &str) -> Result<Self, KvError> {
        let table: toml::Table = text.parse()?;
        let mut entries = BTreeMap::new();
        flatten_into("", &table, &mut entries);
        Ok(Kv { entries })
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.entries.insert(key.into(), value.into());
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), KvError> {
        match self.keys().find(|k| !allowed.contains(k)) {
            Some(k) => Err(KvError::Unknown(k.to_string())),
            None => Ok(()),
        }
    }

    fn require(&self, key: &str) -> Result<&Value, KvError> {
        self.get(key).ok_or_else(|| KvError::Missing(key.to_string()))
    }

    pub fn f64(&self, key: &str) -> Result<f64, KvError> {
        match self.require(key)? {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(type_err(key, "a number")),
        }
    }

    pub fn i64(&self, key: &str) -> Result<i64, KvError> {
        match self.require(key)? {
            Value::Integer(i) => Ok(*i),
            _ => Err(type_err(key, "an integer")),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, KvError> {
        usize::try_from(self.i64(key)?).map_err(|_| type_err(key, "a non-negative integer"))
    }

    pub fn u64(&self, key: &str) -> Result<u64, KvError> {
        u64::try_from(self.i64(key)?).map_err(|_| type_err(key, "a non-negative integer"))
    }

    pub fn bool(&self, key: &str) -> Result<bool, KvError> {
        match self.require(key)? {
            Value::Boolean(b) => Ok(*b),
            _ => Err(type_err(key, "a boolean")),
        }
    }

    pub fn str(&self, key: &str) -> Result<&str, KvError> {
        match self.require(key)? {
            Value::String(s) => Ok(s),
            _ => Err(type_err(key, "a string")),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, KvError> {
        let Value::Array(items) = self.require(key)? else {
            return Err(type_err(key, "an array of numbers"));
        };
        items
            .iter()
            .map(|v| match v {
                Value::Float(f) => Ok(*f),
                Value::Integer(i) => Ok(*i as f64),
                _ => Err(type_err(key, "an array of numbers")),
            })
            .collect()
    }

    pub fn i64_list(&self, key: &str) -> Result<Vec<i64>, KvError> {
        let Value::Array(items) = self.require(key)? else {
            return Err(type_err(key, "an array of integers"));
        };
        items
            .iter()
            .map(|v| v.as_integer().ok_or_else(|| type_err(key, "an array of integers")))
            .collect()
    }

    /// Renders one `key = value` line per entry, in key order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            writeln!(out, "{k} = {v}").expect("write to string");
        }
        out
    }
}

fn type_err(key: &str, expected: &'static str) -> KvError {
    KvError::Type {
        key: key.to_string(),
        expected,
    }
}

/// TOML array of floats.
pub fn float_array(values: &[f64]) -> Value {
    Value::Array(values.iter().map(|&v| Value::Float(v)).collect())
}
