//! Schema transformations for Object-Role Modeling.
//!
//! The crate holds the schema model and its well-formedness axioms, a small
//! relational rule language, populations, a template language for
//! transformation schemes, the transformation engine with its CleanUp and
//! Reduce stages, and bounded equivalence checking. It needs `alloc` only;
//! file handling and the command line live in the `ormtx` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod equivalence;
pub mod error;
pub mod lex;
pub mod name;
pub mod population;
pub mod rule;
pub mod schema;
pub mod scheme;
pub mod transform;
pub mod value;

#[cfg(test)]
mod testing;

pub use error::{EvalError, ParseError};
pub use name::{RoleId, TypeId};
pub use population::Population;
pub use rule::{Relation, Rule, RuleExpr};
pub use schema::{Constraint, ConstraintKind, DomainDecl, Schema, Universe};
pub use value::{Instance, Value};
