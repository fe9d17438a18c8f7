//! Literals and population instances.

use alloc::string::String;
use core::fmt;

use crate::name::TypeId;

/// A literal drawn from a value-type domain.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Str(String),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => write!(f, "'{s}'"),
        }
    }
}

/// Element of a population.
///
/// Value-type instances are literals. Every other object type is populated
/// by abstract instances; `Abstract { ty, tag }` is the instance written
/// `Val(ty, tag)`, i.e. the one identified by `tag` under the implicit
/// reference scheme of `ty`. Enumeration pools use tags of the form `'#k'`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Instance {
    Value(Value),
    Abstract { ty: TypeId, tag: Value },
}

impl Instance {
    pub fn abstract_of(ty: &TypeId, tag: Value) -> Self {
        Instance::Abstract { ty: ty.clone(), tag }
    }

    pub fn as_value(&self) -> Option<&Value> {
        match self {
            Instance::Value(v) => Some(v),
            Instance::Abstract { .. } => None,
        }
    }

    pub fn is_abstract(&self) -> bool {
        matches!(self, Instance::Abstract { .. })
    }
}

impl From<Value> for Instance {
    fn from(v: Value) -> Self {
        Instance::Value(v)
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instance::Value(v) => write!(f, "{v}"),
            Instance::Abstract { ty, tag } => write!(f, "Val({ty},{tag})"),
        }
    }
}
