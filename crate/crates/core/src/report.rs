//! Structured results for condition checks.
//!
//! Every analysis routine returns a [`ConditionReport`]: a verdict name plus
//! an ordered list of named quantities (averages, margins, bounds, booleans,
//! formula text).  Ordering is insertion order so reports print and
//! serialize deterministically; scalar formatting uses Rust's shortest
//! round-trip representation.

use std::fmt;

/// One reported quantity.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(f64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Scalar(x) => write!(f, "{x}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Text(s) => write!(f, "{s}"),
        }
    }
}

/// Named, ordered collection of check outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    name: String,
    entries: Vec<(String, Value)>,
}

impl ConditionReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), entries: Vec::new() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Insert or replace, preserving first-insertion order.
    pub fn set(&mut self, key: impl Into<String>, value: Value) -> &mut Self {
        let key = key.into();
        if let Some(slot) = self.entries.iter_mut().find(|(k, _)| *k == key) {
            slot.1 = value;
        } else {
            self.entries.push((key, value));
        }
        self
    }

    pub fn set_scalar(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.set(key, Value::Scalar(value))
    }

    pub fn set_bool(&mut self, key: impl Into<String>, value: bool) -> &mut Self {
        self.set(key, Value::Bool(value))
    }

    pub fn set_text(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.set(key, Value::Text(value.into()))
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn scalar(&self, key: &str) -> Option<f64> {
        match self.get(key) {
            Some(Value::Scalar(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn bool(&self, key: &str) -> Option<bool> {
        match self.get(key) {
            Some(Value::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.get(key) {
            Some(Value::Text(s)) => Some(s.as_str()),
            _ => None,
        }
    }

    /// Overall verdict of the check; by convention stored under `"holds"`.
    pub fn holds(&self) -> Option<bool> {
        self.bool("holds")
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Absorb `other`, prefixing its keys with `prefix.`.
    pub fn merge(&mut self, prefix: &str, other: &ConditionReport) -> &mut Self {
        for (k, v) in &other.entries {
            self.set(format!("{prefix}.{k}"), v.clone());
        }
        self
    }

    /// `[name]` header plus `key = value` lines.
    pub fn to_kv_text(&self) -> String {
        let mut out = format!("[{}]\n", self.name);
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    /// Column names for a flat CSV rendering, prefixed with `name.`.
    pub fn csv_header(&self) -> Vec<String> {
        self.entries.iter().map(|(k, _)| format!("{}.{}", self.name, k)).collect()
    }

    /// Values matching [`ConditionReport::csv_header`].
    pub fn csv_row(&self) -> Vec<String> {
        self.entries.iter().map(|(_, v)| v.to_string()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insertion_order_is_preserved_and_updates_in_place() {
        let mut r = ConditionReport::new("demo");
        r.set_scalar("first", 1.0);
        r.set_bool("second", true);
        r.set_scalar("first", 2.0);
        let keys: Vec<_> = r.entries().map(|(k, _)| k.to_string()).collect();
        assert_eq!(keys, ["first", "second"]);
        assert_eq!(r.scalar("first"), Some(2.0));
        assert_eq!(r.bool("second"), Some(true));
        assert_eq!(r.scalar("missing"), None);
    }

    #[test]
    fn scalars_render_shortest_roundtrip() {
        let mut r = ConditionReport::new("fmt");
        r.set_scalar("third", 0.1 + 0.2);
        r.set_scalar("tenth", 0.1);
        let text = r.to_kv_text();
        assert!(text.contains("third = 0.30000000000000004\n"), "{text}");
        assert!(text.contains("tenth = 0.1\n"), "{text}");
        assert!(text.starts_with("[fmt]\n"));
    }

    #[test]
    fn merge_prefixes_keys() {
        let mut inner = ConditionReport::new("inner");
        inner.set_bool("holds", false);
        let mut outer = ConditionReport::new("outer");
        outer.set_scalar("x", 3.5);
        outer.merge("sub", &inner);
        assert_eq!(outer.bool("sub.holds"), Some(false));
        assert_eq!(outer.holds(), None);
    }

    #[test]
    fn csv_columns_match_rows() {
        let mut r = ConditionReport::new("check");
        r.set_scalar("margin", -0.25);
        r.set_bool("holds", false);
        assert_eq!(r.csv_header(), ["check.margin", "check.holds"]);
        assert_eq!(r.csv_row(), ["-0.25", "false"]);
    }
}
