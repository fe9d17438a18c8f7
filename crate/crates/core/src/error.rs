//! Errors shared by the parsers and the evaluator.

use alloc::string::String;
use alloc::vec::Vec;

use crate::name::{RoleId, TypeId};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("reference to undeclared {what} `{name}`")]
    Undeclared { what: &'static str, name: String },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unknown type `{0}`")]
    UnknownType(TypeId),
    #[error("unknown role `{0}`")]
    UnknownRole(RoleId),
    #[error("column mismatch: {0}")]
    Columns(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("cyclic rules through {0:?}")]
    Cycle(Vec<TypeId>),
    #[error("population lacks base type `{0}`")]
    MissingBase(TypeId),
    #[error("`{0}` has no finite population under the given bounds")]
    Unbounded(TypeId),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
