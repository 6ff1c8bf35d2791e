//! The controlled natural language: one command per change.
//!
//! ```text
//! rename UBERON:0002398 from 'hand' to 'manus'
//! obsolete EX:1234 with replacement EX:5678
//! create exact synonym 'thigh bone' for 'femur'
//! move E:5 from C:3 to B:2
//! ```
//!
//! References are either bare CURIEs, single-quoted labels, or bare
//! relation words such as `part_of` (read as labels). Quoted strings are
//! taken verbatim; `\'` and `\\` are the only escapes.

mod lexer;
mod parser;
mod render;

use std::fmt;

pub use parser::{parse_command, parse_document};
pub use render::{render_command, render_document, UnrenderableChange};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    /// Never empty.
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: expected ",
            self.span.line, self.span.column
        )?;
        match self.expected.as_slice() {
            [one] => write!(f, "{one}")?,
            many => write!(f, "one of {}", many.join(", "))?,
        }
        write!(f, ", found {}", self.found)
    }
}

impl std::error::Error for ParseError {}

/// All errors from a multi-line document, in line order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseErrors(pub Vec<ParseError>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseErrors {}
