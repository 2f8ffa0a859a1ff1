//! Parser for `name(key=value, ...)` specification strings.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SpecString {
    pub name: String,
    pub params: BTreeMap<String, String>,
    /// Flag or config key the string came from, used in error messages.
    pub origin: String,
}

impl SpecString {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let text = text.trim();
        let (name, rest) = match text.find('(') {
            Some(i) => {
                if !text.ends_with(')') {
                    return Err(Error::domain(origin, format!("unbalanced parentheses in `{text}`")));
                }
                (&text[..i], &text[i + 1..text.len() - 1])
            }
            None => (text, ""),
        };
        let name = name.trim().to_ascii_lowercase();
        if name.is_empty() {
            return Err(Error::domain(origin, "empty specification"));
        }
        let mut params = BTreeMap::new();
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::domain(origin, format!("expected key=value, got `{part}`")))?;
            params.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
        }
        Ok(SpecString {
            name,
            params,
            origin: origin.to_string(),
        })
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.parse::<f64>().map_err(|_| {
                Error::domain(&self.origin, format!("`{key}` must be a number, got `{v}`"))
            }),
        }
    }

    pub fn u32_or(&self, key: &str, default: u32) -> Result<u32> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.parse::<u32>().map_err(|_| {
                Error::domain(
                    &self.origin,
                    format!("`{key}` must be a non-negative integer, got `{v}`"),
                )
            }),
        }
    }

    /// Fails on keys outside `allowed`.
    pub fn only(&self, allowed: &[&str]) -> Result<()> {
        for k in self.params.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::domain(
                    &self.origin,
                    format!("unknown parameter `{k}` for `{}`", self.name),
                ));
            }
        }
        Ok(())
    }
}
