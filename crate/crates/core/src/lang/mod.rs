//! The MJ object language: a small statically typed, single-inheritance
//! language that plays the role of the program under repair.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod scope;
pub mod span;
pub mod typeck;
pub mod types;

pub use ast::{Program, SiteId, StmtId};
pub use parser::parse;
pub use printer::pretty_print;
pub use scope::{VarCandidate, VarKind, VarRef};
pub use span::Span;
pub use typeck::{typecheck, ClassId, ClassTable, DerefSite, SiteKind, StmtTag, TypedProgram};
pub use types::StaticType;

use std::fmt;

/// Parse failure with the set of tokens that would have been accepted.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: error: {}", self.line, self.col, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: error: {}", self.line, self.col, self.message)
    }
}

/// Type errors reported by [`typecheck`]; never empty.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct TypeErrors(pub Vec<TypeError>);

impl fmt::Display for TypeErrors {
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

impl TypeErrors {
    /// Renders as `file:line:col: error: message` lines.
    pub fn render(&self, file: &str) -> String {
        self.0
            .iter()
            .map(|e| format!("{file}:{e}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Front-end failure: either stage can reject a source file.
#[derive(Debug, Clone, thiserror::Error)]
pub enum FrontendError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("{0}")]
    Type(#[from] TypeErrors),
}

impl FrontendError {
    pub fn render(&self, file: &str) -> String {
        match self {
            FrontendError::Syntax(e) => format!("{file}:{e}"),
            FrontendError::Type(e) => e.render(file),
        }
    }
}

/// Parses and type checks `source` in one step.
pub fn compile(file: &str, source: &str) -> Result<TypedProgram, FrontendError> {
    let program = parse(file, source)?;
    Ok(typecheck(&program)?)
}
