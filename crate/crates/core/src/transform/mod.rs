//! Applying instantiated transformations to schema versions.
//!
//! `apply` joins a transformation into a schema under one of three modes
//! and then runs [`cleanup`], which removes the internal types that are both
//! derived and updated, rewrites or drops the constraints that mention them
//! and repeats until nothing changes.

mod apply;
mod cleanup;

use alloc::string::String;
use alloc::vec::Vec;

use crate::equivalence::EquivError;
use crate::error::EvalError;
use crate::scheme::SchemeError;

pub use apply::{apply, apply_alternative, apply_enrich, apply_optimise, check_applicability, ApplicabilityReport, Applied, ApplyOptions, Mode};
pub use cleanup::{cleanup, cleanup_step, CleanupOptions, CleanupStep, CleanupTrace, PiVariant, ReduceAction, Reduction};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Equiv(#[from] EquivError),
    #[error("transformation does not apply: {}", .0.join("; "))]
    NotApplicable(Vec<String>),
    #[error("constraint `{0}` differs from the one already in the schema")]
    ConstraintClash(String),
    #[error("result is not a schema version: {}", .0.join("; "))]
    InvalidResult(Vec<String>),
}
