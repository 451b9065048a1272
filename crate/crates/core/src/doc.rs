//! Sectioned `key = value` text documents.
//!
//! Used for experiment configuration files and for serialized models.
//! Syntax: `[section]` headers, `key = value` entries, `#` comments, blank
//! lines ignored. Entries before the first header belong to the unnamed
//! top-level section `""`. Model documents start with a `[document]`
//! section carrying `format`, `version` and `kind`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const FORMAT_NAME: &str = "risklab";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Section {
            name: name.into(),
            line: 0,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push(Entry {
            key: key.into(),
            value: value.to_string(),
            line: 0,
        });
        self
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn require(&self, key: &str) -> Result<&Entry> {
        self.get(key).ok_or_else(|| {
            Error::Config(format!("section [{}] is missing `{key}`", self.name))
        })
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.require(key)?.parse()
    }
}

impl Entry {
    pub fn parse<T: std::str::FromStr>(&self) -> Result<T> {
        self.value.parse().map_err(|_| Error::ConfigLine {
            line: self.line,
            message: format!("`{}` is not a valid value for `{}`", self.value, self.key),
        })
    }

    pub fn parse_list<T: std::str::FromStr>(&self) -> Result<Vec<T>> {
        if self.value.trim().is_empty() {
            return Ok(Vec::new());
        }
        self.value
            .split(',')
            .map(|part| {
                part.trim().parse().map_err(|_| Error::ConfigLine {
                    line: self.line,
                    message: format!("`{}` in `{}` is not a valid value", part.trim(), self.key),
                })
            })
            .collect()
    }

    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::ConfigLine {
            line: self.line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    /// Empty model document of the given kind.
    pub fn with_kind(kind: &str) -> Self {
        let mut header = Section::new("document");
        header
            .push("format", FORMAT_NAME)
            .push("version", FORMAT_VERSION)
            .push("kind", kind);
        Document {
            sections: vec![header],
        }
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn require(&self, name: &str) -> Result<&Section> {
        self.section(name)
            .ok_or_else(|| Error::Config(format!("missing section [{name}]")))
    }

    pub fn add(&mut self, section: Section) {
        self.sections.push(section);
    }

    /// The `kind` of a model document, after checking format and version.
    pub fn kind(&self) -> Result<&str> {
        let header = self.require("document")?;
        let format = header.require("format")?;
        if format.value != FORMAT_NAME {
            return Err(format.error(format!("unknown document format `{}`", format.value)));
        }
        let version: u32 = header.parse("version")?;
        if version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "document version {version} is not supported (expected {FORMAT_VERSION})"
            )));
        }
        Ok(&header.require("kind")?.value)
    }

    pub fn parse(text: &str) -> Result<Document> {
        let mut sections = vec![Section::new("")];
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::ConfigLine {
                    line,
                    message: format!("malformed section header `{trimmed}`"),
                })?;
                let name = name.trim();
                if sections.iter().any(|s| s.name == name) {
                    return Err(Error::ConfigLine {
                        line,
                        message: format!("duplicate section [{name}]"),
                    });
                }
                sections.push(Section {
                    name: name.to_string(),
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::ConfigLine {
                line,
                message: format!("expected `key = value`, found `{trimmed}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::ConfigLine {
                    line,
                    message: "empty key".into(),
                });
            }
            let current = sections.last_mut().expect("top-level section exists");
            if current.get(key).is_some() {
                return Err(Error::ConfigLine {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            current.entries.push(Entry {
                key: key.to_string(),
                value: value.trim().to_string(),
                line,
            });
        }
        if sections[0].entries.is_empty() {
            sections.remove(0);
        }
        Ok(Document { sections })
    }

    pub fn read(path: &Path) -> Result<Document> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Document::parse(&text).map_err(|e| match e {
            Error::ConfigLine { line, message } => Error::Parse {
                path: path.to_path_buf(),
                message: format!("line {line}: {message}"),
            },
            other => other,
        })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, section) in self.sections.iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            if !section.name.is_empty() {
                let _ = writeln!(out, "[{}]", section.name);
            }
            for e in &section.entries {
                let _ = writeln!(out, "{} = {}", e.key, e.value);
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }
}

/// Comma-joined values using the shortest round-tripping float form.
pub fn join_floats(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_sections_and_lines() {
        let doc = Document::parse("seed = 3\n# c\n[sim]\nn = 10\n\n[nn]\nhidden = 3, 2\n").unwrap();
        assert_eq!(doc.sections.len(), 3);
        assert_eq!(doc.section("").unwrap().parse::<u64>("seed").unwrap(), 3);
        let nn = doc.section("nn").unwrap();
        assert_eq!(nn.require("hidden").unwrap().parse_list::<usize>().unwrap(), vec![3, 2]);
        assert_eq!(nn.require("hidden").unwrap().line, 7);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match Document::parse("[sim]\nn 10\n") {
            Err(Error::ConfigLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match Document::parse("[sim]\nn = 1\nn = 2\n") {
            Err(Error::ConfigLine { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let doc = Document::parse("[sim]\nn = ten\n").unwrap();
        match doc.section("sim").unwrap().parse::<usize>("n") {
            Err(Error::ConfigLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn render_parse_round_trip() {
        let mut doc = Document::with_kind("glm");
        let mut s = Section::new("coefficients");
        s.push("x1", 0.1f64).push("x2", join_floats([1.0 / 3.0, -2.5]));
        doc.add(s);
        let back = Document::parse(&doc.render()).unwrap();
        assert_eq!(back.kind().unwrap(), "glm");
        let v = back.section("coefficients").unwrap().require("x2").unwrap();
        assert_eq!(v.parse_list::<f64>().unwrap(), vec![1.0 / 3.0, -2.5]);
    }

    #[test]
    fn version_is_checked() {
        let doc = Document::parse("[document]\nformat = risklab\nversion = 9\nkind = glm\n").unwrap();
        assert!(doc.kind().is_err());
    }
}
