//! Multi-file programs: files are concatenated and byte offsets mapped back.

use std::fmt;
use std::path::Path;

use aspdbg_core::ast::Span;
use aspdbg_core::parser::ParseError;
use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
struct SourceFile {
    name: String,
    start: usize,
    len: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sources {
    files: Vec<SourceFile>,
    text: String,
}

/// A 1-based position inside one input file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub file: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub start_line: usize,
    pub start_column: usize,
    pub end_line: usize,
    pub end_column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.file, self.start_line)?;
        if self.end_line != self.start_line {
            write!(f, "-{}", self.end_line)?;
        }
        Ok(())
    }
}

impl Sources {
    pub fn new() -> Self {
        Sources::default()
    }

    /// Appends a file. A newline separates it from the next one.
    pub fn add(&mut self, name: &str, text: &str) {
        let start = self.text.len();
        self.text.push_str(text);
        self.files.push(SourceFile {
            name: name.to_string(),
            start,
            len: text.len(),
        });
        self.text.push('\n');
    }

    pub fn load<P: AsRef<Path>>(paths: &[P]) -> Result<Self, Error> {
        let mut s = Sources::new();
        for p in paths {
            let p = p.as_ref();
            let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.display().to_string(),
                source,
            })?;
            s.add(&p.display().to_string(), &text);
        }
        Ok(s)
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn file_names(&self) -> Vec<String> {
        self.files.iter().map(|f| f.name.clone()).collect()
    }

    pub fn locate(&self, offset: usize) -> Location {
        let Some(file) = self
            .files
            .iter()
            .rev()
            .find(|f| f.start <= offset)
            .or(self.files.first())
        else {
            return Location {
                file: String::new(),
                line: 1,
                column: 1,
            };
        };
        let local = offset.saturating_sub(file.start).min(file.len);
        let text = &self.text[file.start..file.start + local];
        let line = text.matches('\n').count() + 1;
        let column = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Location {
            file: file.name.clone(),
            line,
            column,
        }
    }

    pub fn span(&self, span: Span) -> SourceSpan {
        let start = self.locate(span.start);
        let end = self.locate(span.end.max(span.start));
        SourceSpan {
            file: start.file,
            start_line: start.line,
            start_column: start.column,
            end_line: end.line,
            end_column: end.column,
        }
    }

    /// Re-anchors a parse error on the concatenated text to its file.
    pub fn parse_error(&self, e: &ParseError) -> Error {
        Error::Parse {
            location: self.locate(e.offset),
            message: e.message(),
        }
    }
}
