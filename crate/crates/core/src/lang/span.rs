use serde::Serialize;
use std::fmt;

/// Location of a node in its source file.
///
/// Lines and columns are 1-based; `start..end` is the byte range. Nodes
/// synthesized by rewrites carry the span of the node they replace, or
/// [`Span::SYNTHETIC`] when they have no source counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub start: u32,
    pub end: u32,
}

impl Span {
    pub const SYNTHETIC: Span = Span {
        line: 0,
        col: 0,
        start: 0,
        end: 0,
    };

    pub fn new(line: u32, col: u32, start: u32, end: u32) -> Self {
        Span {
            line,
            col,
            start,
            end,
        }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn to(self, other: Span) -> Span {
        if other.end == 0 && other.line == 0 {
            return self;
        }
        Span {
            line: self.line,
            col: self.col,
            start: self.start,
            end: other.end.max(self.end),
        }
    }

    pub fn is_synthetic(&self) -> bool {
        *self == Span::SYNTHETIC
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}
