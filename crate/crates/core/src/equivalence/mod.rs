//! Desk-scale verification by exhaustive enumeration: state spaces, direct
//! equivalence and strengthening, the scheme properties, and the behaviour
//! of the update mapping.
//!
//! Every verdict holds at the bounds it was computed with and nowhere else.

mod enumerate;
mod mu;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::bounds::Bounds;
use crate::error::EvalError;
use crate::name::TypeId;
use crate::population::Population;
use crate::schema::Schema;
use crate::scheme::{instantiate, InstantiatedTransformation, ParList, SchemeError, TransformationScheme};

pub use enumerate::{enumerate_state_space, object_candidates, StateSpace};
pub use mu::{check_bijection, check_update_distributivity, mu_image, BijectionReport, DistribCounterexample, DistribReport, MuScope};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EquivError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("state space exceeds the cap of {cap} search nodes")]
    SpaceExceeded { visited: u64, cap: u64 },
    #[error("vocabularies differ: only left {left:?}, only right {right:?}")]
    VocabularyMismatch { left: Vec<TypeId>, right: Vec<TypeId> },
    #[error("{0}")]
    Unsupported(String),
}

/// Outcome of comparing two state spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    /// The first schema admits strictly fewer populations.
    S1Stronger,
    S2Stronger,
    Incomparable,
}

impl Verdict {
    pub fn swapped(self) -> Verdict {
        match self {
            Verdict::S1Stronger => Verdict::S2Stronger,
            Verdict::S2Stronger => Verdict::S1Stronger,
            v => v,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Equivalent => "equivalent",
            Verdict::S1Stronger => "first schema stronger",
            Verdict::S2Stronger => "second schema stronger",
            Verdict::Incomparable => "incomparable",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub verdict: Verdict,
    /// Types the populations were compared on.
    pub vocabulary: BTreeSet<TypeId>,
    pub left: usize,
    pub right: usize,
    /// A population valid on the left only, if any.
    pub only_left: Option<Population>,
    pub only_right: Option<Population>,
    pub bounds: Bounds,
}

/// Types a user of the schema sees: everything but value types and
/// internal types.
pub fn conceptual_types(s: &Schema) -> BTreeSet<TypeId> {
    s.types().into_iter().filter(|t| !s.universe.is_value_type(t) && !s.internal.contains(t)).collect()
}

/// Valid populations cut down to `vocabulary`.
pub fn view(space: &StateSpace, vocabulary: &BTreeSet<TypeId>) -> BTreeSet<Population> {
    space.pops.iter().map(|p| p.restrict(vocabulary)).collect()
}

/// Compares the state spaces of two schemas on their conceptual types,
/// which must coincide. Each side computes its derived types from its own
/// base types.
pub fn check_direct_equivalence(s1: &Schema, s2: &Schema, b: &Bounds) -> Result<Comparison, EquivError> {
    let (v1, v2) = (conceptual_types(s1), conceptual_types(s2));
    if v1 != v2 {
        return Err(EquivError::VocabularyMismatch {
            left: v1.difference(&v2).cloned().collect(),
            right: v2.difference(&v1).cloned().collect(),
        });
    }
    let a = view(&enumerate_state_space(s1, b)?, &v1);
    let c = view(&enumerate_state_space(s2, b)?, &v1);
    Ok(compare_sets(&a, &c, v1, b))
}

pub fn compare_sets(a: &BTreeSet<Population>, c: &BTreeSet<Population>, vocabulary: BTreeSet<TypeId>, b: &Bounds) -> Comparison {
    let only_left = a.difference(c).next().cloned();
    let only_right = c.difference(a).next().cloned();
    let verdict = match (&only_left, &only_right) {
        (None, None) => Verdict::Equivalent,
        (None, Some(_)) => Verdict::S1Stronger,
        (Some(_), None) => Verdict::S2Stronger,
        (Some(_), Some(_)) => Verdict::Incomparable,
    };
    Comparison { verdict, vocabulary, left: a.len(), right: c.len(), only_left, only_right, bounds: b.clone() }
}

/// The replaced side of a transformation: its `Sch` without the
/// components listed under To and without the rules that mention them.
pub fn from_view(inst: &InstantiatedTransformation, context: Option<&Schema>) -> Schema {
    let mut s = inst.sch_schema(context);
    let to = inst.to_of();
    let keep: BTreeSet<TypeId> = s.types().difference(&to.types).cloned().collect();
    s.universe = s.universe.restrict(&keep);
    s.name = alloc::format!("From-{}", inst.name);
    let to_ids: BTreeSet<&str> = to.constraints.iter().map(|k| k.id.as_str()).collect();
    let u = s.universe.clone();
    s.constraints.retain(|k| {
        !to_ids.contains(k.id.as_str())
            && k.roles().iter().all(|r| u.rel_of(r).is_some())
            && k.referenced_types(&u).is_subset(&keep)
    });
    s.derivation_rules.retain(|r| keep.contains(&r.defines) && r.depends().is_subset(&keep));
    s.dom.retain(|v, _| keep.contains(v));
    let used: BTreeSet<String> = s.dom.values().cloned().collect();
    s.domains.retain(|d, _| used.contains(d));
    s
}

/// The replacing side: `Sch` with the derivation rules, the To types
/// hidden as internal types and the constraints listed under From left out.
pub fn to_view(inst: &InstantiatedTransformation, context: Option<&Schema>) -> Schema {
    let mut s = inst.sch_schema(context);
    s.name = alloc::format!("To-{}", inst.name);
    let from = inst.from_of();
    let from_ids: BTreeSet<&str> = from.constraints.iter().map(|k| k.id.as_str()).collect();
    s.constraints.retain(|k| !from_ids.contains(k.id.as_str()));
    s.internal = inst.to_of().types;
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeProperty {
    EquivalencePreserving,
    Strengthening,
    Neither,
}

impl fmt::Display for SchemeProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeProperty::EquivalencePreserving => "equivalence preserving",
            SchemeProperty::Strengthening => "strengthening",
            SchemeProperty::Neither => "neither",
        })
    }
}

#[derive(Clone, Debug)]
pub struct PropertyReport {
    pub property: SchemeProperty,
    /// From side first, To side second.
    pub comparison: Comparison,
}

/// Compares the from view with the to view of one instantiation.
pub fn check_instance_property(
    inst: &InstantiatedTransformation,
    context: Option<&Schema>,
    b: &Bounds,
) -> Result<PropertyReport, EquivError> {
    let comparison = check_direct_equivalence(&from_view(inst, context), &to_view(inst, context), b)?;
    let property = match comparison.verdict {
        Verdict::Equivalent => SchemeProperty::EquivalencePreserving,
        Verdict::S2Stronger => SchemeProperty::Strengthening,
        _ => SchemeProperty::Neither,
    };
    Ok(PropertyReport { property, comparison })
}

pub fn check_scheme_property(
    t: &TransformationScheme,
    x: &ParList,
    context: Option<&Schema>,
    b: &Bounds,
) -> Result<PropertyReport, EquivError> {
    check_instance_property(&instantiate(t, x, context)?, context, b)
}
