use crate::lang::{ClassId, StaticType};
use serde::Serialize;
use std::fmt;

/// Heap object identity, unique within one execution.
pub type ObjId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
    Null,
    Obj(ObjId),
}

impl Value {
    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn as_obj(&self) -> Option<ObjId> {
        match self {
            Value::Obj(o) => Some(*o),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> bool {
        matches!(self, Value::Bool(true))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Null => f.write_str("null"),
            Value::Obj(o) => write!(f, "#{o}"),
        }
    }
}

/// `int` → 0, `bool` → false, `str` → "", classes → null.
///
/// # Panics
/// On `void`, which has no values.
pub fn default_value_of(t: &StaticType) -> Value {
    match t {
        StaticType::Int => Value::Int(0),
        StaticType::Bool => Value::Bool(false),
        StaticType::Str => Value::Str(String::new()),
        StaticType::Class(_) | StaticType::Null => Value::Null,
        StaticType::Void => panic!("void has no default value"),
    }
}

#[derive(Debug, Clone)]
pub struct Object {
    pub class: ClassId,
    pub fields: Vec<Value>,
}
