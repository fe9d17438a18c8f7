//! Populations and the population-level view of a schema.

mod check;
mod constraint;
mod text;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use crate::error::EvalError;
use crate::name::TypeId;
use crate::rule::Relation;
use crate::value::Instance;

pub(crate) use check::eval_rule;
pub use check::{extend_with_derivations, is_pop, Ctx, PopKind, PopReport, Violation};
pub use constraint::eval_constraint;
pub use text::{parse_population, serialize_population};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Extent {
    Objects(BTreeSet<Instance>),
    Tuples(Relation),
}

impl Extent {
    pub fn len(&self) -> usize {
        match self {
            Extent::Objects(s) => s.len(),
            Extent::Tuples(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Assignment of extents to types. Value types are normally absent: their
/// population is their domain.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Population {
    pub extents: BTreeMap<TypeId, Extent>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PopOp {
    Union,
    Minus,
}

impl Population {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, t: &TypeId) -> Option<&Extent> {
        self.extents.get(t)
    }

    pub fn objects(&self, t: &TypeId) -> Option<&BTreeSet<Instance>> {
        match self.extents.get(t) {
            Some(Extent::Objects(s)) => Some(s),
            _ => None,
        }
    }

    pub fn relation(&self, t: &TypeId) -> Option<&Relation> {
        match self.extents.get(t) {
            Some(Extent::Tuples(r)) => Some(r),
            _ => None,
        }
    }

    pub fn set_objects(&mut self, t: impl Into<TypeId>, xs: impl IntoIterator<Item = Instance>) {
        self.extents.insert(t.into(), Extent::Objects(xs.into_iter().collect()));
    }

    pub fn set_relation(&mut self, t: impl Into<TypeId>, r: Relation) {
        self.extents.insert(t.into(), Extent::Tuples(r));
    }

    pub fn types(&self) -> BTreeSet<TypeId> {
        self.extents.keys().cloned().collect()
    }

    pub fn restrict(&self, keep: &BTreeSet<TypeId>) -> Population {
        Population {
            extents: self.extents.iter().filter(|(t, _)| keep.contains(*t)).map(|(t, e)| (t.clone(), e.clone())).collect(),
        }
    }

    /// Total number of instances and tuples.
    pub fn size(&self) -> usize {
        self.extents.values().map(Extent::len).sum()
    }

    /// Pointwise union or difference over the same set of types.
    pub fn combine(&self, other: &Population, op: PopOp) -> Result<Population, EvalError> {
        if self.types() != other.types() {
            return Err(EvalError::Columns(format!(
                "populations over different types: {:?} vs {:?}",
                self.types(),
                other.types()
            )));
        }
        let mut out = Population::new();
        for (t, a) in &self.extents {
            let e = match (a, &other.extents[t]) {
                (Extent::Objects(x), Extent::Objects(y)) => Extent::Objects(match op {
                    PopOp::Union => x.union(y).cloned().collect(),
                    PopOp::Minus => x.difference(y).cloned().collect(),
                }),
                (Extent::Tuples(x), Extent::Tuples(y)) => Extent::Tuples(match op {
                    PopOp::Union => x.union(y)?,
                    PopOp::Minus => x.minus(y)?,
                }),
                _ => return Err(EvalError::Type(format!("{t} is a relation on one side only"))),
            };
            out.extents.insert(t.clone(), e);
        }
        Ok(out)
    }

    pub fn is_subset_of(&self, other: &Population) -> bool {
        self.extents.iter().all(|(t, e)| match (e, other.extents.get(t)) {
            (Extent::Objects(x), Some(Extent::Objects(y))) => x.is_subset(y),
            (Extent::Tuples(x), Some(Extent::Tuples(y))) => match x.aligned(&y.columns) {
                Ok(x) => x.tuples.is_subset(&y.tuples),
                Err(_) => false,
            },
            _ => e.is_empty(),
        })
    }
}

/// One-line rendering, e.g. `{Country = {Val(Country,'#0')}; f = {}}`.
impl core::fmt::Display for Population {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("{")?;
        for (i, (t, e)) in self.extents.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            let items: Vec<alloc::string::String> = match e {
                Extent::Objects(xs) => xs.iter().map(|x| format!("{x}")).collect(),
                Extent::Tuples(r) => r.tuples.iter().map(|tup| tuple_text(&r.columns, tup)).collect(),
            };
            write!(f, "{t} = {{{}}}", items.join(", "))?;
        }
        f.write_str("}")
    }
}

pub fn pop_combine(a: &Population, b: &Population, op: PopOp) -> Result<Population, EvalError> {
    a.combine(b, op)
}

/// Tuples of a relation as a flat list, mostly for witnesses.
pub(crate) fn tuple_text(cols: &[crate::name::RoleId], t: &[Instance]) -> alloc::string::String {
    let parts: Vec<alloc::string::String> = cols.iter().zip(t).map(|(c, x)| format!("{c}={x}")).collect();
    format!("<{}>", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Value;
    use alloc::vec;

    fn unary(xs: &[&str]) -> Population {
        let mut p = Population::new();
        p.set_relation("f", Relation::with_tuples(vec!["f-1".into()], xs.iter().map(|x| vec![Instance::Value(Value::str(*x))])));
        p
    }

    #[test]
    fn pointwise_union_and_difference() {
        let (a, b) = (unary(&["a"]), unary(&["b"]));
        assert_eq!(a.combine(&b, PopOp::Union).unwrap(), unary(&["a", "b"]));
        assert_eq!(a.combine(&a, PopOp::Minus).unwrap(), unary(&[]));
        assert_eq!(a.combine(&unary(&[]), PopOp::Union).unwrap(), a);
        assert!(a.is_subset_of(&unary(&["a", "b"])));
    }

    #[test]
    fn different_type_sets_do_not_combine() {
        let a = unary(&["a"]);
        let mut objs = Population::new();
        objs.set_objects("A", [Instance::Value(Value::Int(1))]);
        assert!(matches!(a.combine(&objs, PopOp::Union), Err(EvalError::Columns(_))));
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let a = unary(&["a"]);
        let mut objs = Population::new();
        objs.set_objects("f", [Instance::Value(Value::Int(1))]);
        assert!(a.combine(&objs, PopOp::Union).is_err());
    }
}
