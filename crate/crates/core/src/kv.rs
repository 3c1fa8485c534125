//! Sectioned key-value text files.
//!
//! ```text
//! # comment
//! units = SI
//! [section]
//! key = value          # trailing comments are allowed
//! list = 1.0, 2.0, 3.0
//! ```
//!
//! Keys before the first `[section]` header belong to the root section,
//! whose name is the empty string. Every error carries the 1-based line
//! number it refers to.

use std::collections::HashSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

impl Entry {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Config { line: self.line, message: message.into() }
    }

    pub fn as_str(&self) -> &str {
        &self.value
    }

    pub fn as_f64(&self) -> Result<f64> {
        let v: f64 = self
            .value
            .parse()
            .map_err(|_| self.err(format!("`{}` expects a number, got `{}`", self.key, self.value)))?;
        if !v.is_finite() {
            return Err(self.err(format!("`{}` must be finite", self.key)));
        }
        Ok(v)
    }

    pub fn as_usize(&self) -> Result<usize> {
        self.value.parse().map_err(|_| {
            self.err(format!("`{}` expects a non-negative integer, got `{}`", self.key, self.value))
        })
    }

    pub fn as_list(&self) -> Vec<&str> {
        self.value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
    }

    pub fn as_f64_list(&self) -> Result<Vec<f64>> {
        self.as_list()
            .into_iter()
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.err(format!("`{}`: `{s}` is not a finite number", self.key)))
            })
            .collect()
    }

    /// Error located at this entry's line.
    pub fn error(&self, message: impl Into<String>) -> Error {
        self.err(message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn require(&self, key: &str) -> Result<&Entry> {
        self.get(key).ok_or_else(|| Error::Config {
            line: self.line,
            message: format!("missing key `{key}` in {}", self.describe()),
        })
    }

    /// Rejects keys not listed in `known`.
    pub fn check_keys(&self, known: &[&str]) -> Result<()> {
        for e in &self.entries {
            if !known.contains(&e.key.as_str()) {
                return Err(e.err(format!("unknown key `{}` in {}", e.key, self.describe())));
            }
        }
        Ok(())
    }

    fn describe(&self) -> String {
        if self.name.is_empty() {
            "the top-level section".to_string()
        } else {
            format!("section [{}]", self.name)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    sections: Vec<Section>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections = vec![Section { name: String::new(), line: 1, entries: Vec::new() }];
        let mut seen_sections = HashSet::new();
        seen_sections.insert(String::new());
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config { line, message: "unterminated section header".into() })?
                    .trim();
                if name.is_empty() {
                    return Err(Error::Config { line, message: "empty section name".into() });
                }
                if !seen_sections.insert(name.to_string()) {
                    return Err(Error::Config { line, message: format!("duplicate section [{name}]") });
                }
                sections.push(Section { name: name.to_string(), line, entries: Vec::new() });
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::Config { line, message: format!("invalid key `{key}`") });
            }
            let section = sections.last_mut().expect("root section always present");
            if section.get(key).is_some() {
                return Err(Error::Config { line, message: format!("duplicate key `{key}`") });
            }
            section.entries.push(Entry { key: key.to_string(), value: value.to_string(), line });
        }
        Ok(Self { sections })
    }

    pub fn root(&self) -> &Section {
        &self.sections[0]
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    /// Requires `units = SI` in the root section.
    pub fn require_si_units(&self) -> Result<()> {
        let e = self.root().require("units")?;
        if e.value != "SI" {
            return Err(e.error(format!("only `units = SI` is supported, got `{}`", e.value)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_lists() {
        let doc = Document::parse(
            "# header\nunits = SI\n\n[grid]\nn = 4096 # samples\nspan=1e-9\n[sellmeier]\nordinary = 1, 2.5,3\n",
        )
        .unwrap();
        doc.require_si_units().unwrap();
        let g = doc.section("grid").unwrap();
        assert_eq!(g.require("n").unwrap().as_usize().unwrap(), 4096);
        assert_eq!(g.require("span").unwrap().as_f64().unwrap(), 1e-9);
        let s = doc.section("sellmeier").unwrap();
        assert_eq!(s.get("ordinary").unwrap().as_f64_list().unwrap(), vec![1.0, 2.5, 3.0]);
        assert_eq!(s.get("ordinary").unwrap().line, 8);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = Document::parse("units = SI\n[a]\nbroken line\n").unwrap_err();
        assert_eq!(e, Error::Config { line: 3, message: "expected `key = value`, got `broken line`".into() });
        let e = Document::parse("x = 1\nx = 2\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }));
        let doc = Document::parse("units = SI\nv = abc\n").unwrap();
        assert!(matches!(doc.root().get("v").unwrap().as_f64(), Err(Error::Config { line: 2, .. })));
        let doc = Document::parse("units = cgs\n").unwrap();
        assert!(matches!(doc.require_si_units(), Err(Error::Config { line: 1, .. })));
        let doc = Document::parse("[s]\nfoo = 1\n").unwrap();
        assert!(matches!(doc.section("s").unwrap().check_keys(&["bar"]), Err(Error::Config { line: 2, .. })));
    }
}
