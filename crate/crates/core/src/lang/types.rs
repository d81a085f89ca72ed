use serde::Serialize;
use std::fmt;

/// Static type of an MJ expression or declaration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum StaticType {
    Int,
    Bool,
    Str,
    Void,
    Class(String),
    /// Type of the `null` literal; assignable to every class type and
    /// never written in source.
    Null,
}

impl StaticType {
    pub fn class(name: impl Into<String>) -> Self {
        StaticType::Class(name.into())
    }

    pub fn is_class(&self) -> bool {
        matches!(self, StaticType::Class(_))
    }

    pub fn is_primitive(&self) -> bool {
        matches!(self, StaticType::Int | StaticType::Bool | StaticType::Str)
    }

    /// Only class-typed values (and the null literal) may be null.
    pub fn is_nullable(&self) -> bool {
        matches!(self, StaticType::Class(_) | StaticType::Null)
    }

    pub fn class_name(&self) -> Option<&str> {
        match self {
            StaticType::Class(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for StaticType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StaticType::Int => f.write_str("int"),
            StaticType::Bool => f.write_str("bool"),
            StaticType::Str => f.write_str("str"),
            StaticType::Void => f.write_str("void"),
            StaticType::Class(n) => f.write_str(n),
            StaticType::Null => f.write_str("null"),
        }
    }
}
