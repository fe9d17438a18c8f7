use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::error::EvalError;
use crate::name::RoleId;
use crate::value::Instance;

/// A set of tuples over named columns.
///
/// A relation with no columns and no tuples is the polymorphic empty
/// relation produced by the literal `{}`; it is the identity of union.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation {
    pub columns: Vec<RoleId>,
    pub tuples: BTreeSet<Vec<Instance>>,
}

impl Relation {
    pub fn new(columns: Vec<RoleId>) -> Self {
        Self { columns, tuples: BTreeSet::new() }
    }

    pub fn with_tuples(columns: Vec<RoleId>, tuples: impl IntoIterator<Item = Vec<Instance>>) -> Self {
        Self { columns, tuples: tuples.into_iter().collect() }
    }

    pub fn is_polymorphic_empty(&self) -> bool {
        self.columns.is_empty() && self.tuples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn index_of(&self, r: &RoleId) -> Option<usize> {
        self.columns.iter().position(|c| c == r)
    }

    fn same_columns(&self, other: &[RoleId]) -> bool {
        self.columns.len() == other.len() && other.iter().all(|r| self.columns.contains(r))
    }

    /// Reorders the columns to `order`, which must be a permutation of them.
    pub fn aligned(&self, order: &[RoleId]) -> Result<Relation, EvalError> {
        if self.is_polymorphic_empty() {
            return Ok(Relation::new(order.to_vec()));
        }
        if self.columns == order {
            return Ok(self.clone());
        }
        if !self.same_columns(order) {
            return Err(EvalError::Columns(format!("{:?} is not a permutation of {:?}", self.columns, order)));
        }
        let idx: Vec<usize> = order.iter().map(|r| self.index_of(r).unwrap()).collect();
        Ok(Relation {
            columns: order.to_vec(),
            tuples: self.tuples.iter().map(|t| idx.iter().map(|&i| t[i].clone()).collect()).collect(),
        })
    }

    /// The instances in column `r`.
    pub fn column(&self, r: &RoleId) -> BTreeSet<Instance> {
        match self.index_of(r) {
            Some(i) => self.tuples.iter().map(|t| t[i].clone()).collect(),
            None => BTreeSet::new(),
        }
    }

    pub fn union(&self, other: &Relation) -> Result<Relation, EvalError> {
        if other.is_polymorphic_empty() {
            return Ok(self.clone());
        }
        if self.is_polymorphic_empty() {
            return Ok(other.clone());
        }
        let mut out = self.clone();
        out.tuples.extend(other.aligned(&self.columns)?.tuples);
        Ok(out)
    }

    pub fn minus(&self, other: &Relation) -> Result<Relation, EvalError> {
        if other.is_polymorphic_empty() || self.is_polymorphic_empty() {
            return Ok(self.clone());
        }
        let other = other.aligned(&self.columns)?;
        let mut out = self.clone();
        out.tuples.retain(|t| !other.tuples.contains(t));
        Ok(out)
    }
}
