//! Schema versions: the type universe, constraints, rules and domains.

mod axioms;
mod text;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::EvalError;
use crate::name::{RoleId, TypeId};
use crate::rule::Rule;
use crate::value::{Instance, Value};

pub use axioms::{is_is, is_sch, validate, validate_universe, AxiomCheck, AxiomReport};
pub use text::{parse_constraint_at, parse_schema, serialize_schema};
pub(crate) use text::value_list;

/// The information structure shared by every version of an application.
///
/// `object_types` includes the value types. `sub_of` holds `(sub, super)`
/// pairs and is expected to be transitively closed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Universe {
    pub object_types: BTreeSet<TypeId>,
    pub value_types: BTreeSet<TypeId>,
    pub relationship_types: BTreeMap<TypeId, Vec<RoleId>>,
    pub player: BTreeMap<RoleId, TypeId>,
    pub sub_of: BTreeSet<(TypeId, TypeId)>,
}

impl Universe {
    pub fn types(&self) -> BTreeSet<TypeId> {
        let mut out = self.object_types.clone();
        out.extend(self.relationship_types.keys().cloned());
        out
    }

    pub fn contains(&self, t: &TypeId) -> bool {
        self.object_types.contains(t) || self.relationship_types.contains_key(t)
    }

    pub fn is_value_type(&self, t: &TypeId) -> bool {
        self.value_types.contains(t)
    }

    pub fn is_relationship_type(&self, t: &TypeId) -> bool {
        self.relationship_types.contains_key(t)
    }

    /// Object types that are not value types.
    pub fn is_entity_type(&self, t: &TypeId) -> bool {
        self.object_types.contains(t) && !self.value_types.contains(t)
    }

    pub fn roles_of(&self, t: &TypeId) -> Option<&[RoleId]> {
        self.relationship_types.get(t).map(Vec::as_slice)
    }

    /// The relationship type a role belongs to.
    pub fn rel_of(&self, r: &RoleId) -> Option<&TypeId> {
        self.relationship_types.iter().find(|(_, rs)| rs.contains(r)).map(|(t, _)| t)
    }

    pub fn roles_played_by(&self, t: &TypeId) -> Vec<RoleId> {
        self.player.iter().filter(|(_, p)| *p == t).map(|(r, _)| r.clone()).collect()
    }

    pub fn is_sub(&self, x: &TypeId, y: &TypeId) -> bool {
        self.sub_of.contains(&(x.clone(), y.clone()))
    }

    pub fn supertypes(&self, x: &TypeId) -> BTreeSet<TypeId> {
        self.sub_of.iter().filter(|(a, _)| a == x).map(|(_, b)| b.clone()).collect()
    }

    pub fn subtypes(&self, y: &TypeId) -> BTreeSet<TypeId> {
        self.sub_of.iter().filter(|(_, b)| b == y).map(|(a, _)| a.clone()).collect()
    }

    /// Direct subtyping: `x ⊑ y` with no type strictly in between.
    pub fn sub_of_1(&self, x: &TypeId, y: &TypeId) -> Result<bool, EvalError> {
        for t in [x, y] {
            if !self.contains(t) {
                return Err(EvalError::UnknownType(t.clone()));
            }
        }
        if !self.is_sub(x, y) {
            return Ok(false);
        }
        Ok(!self.object_types.iter().any(|z| self.is_sub(x, z) && self.is_sub(z, y)))
    }

    /// `Val(t, v)`, the instance of `t` identified by `v`.
    pub fn val(&self, t: &TypeId, v: Value) -> Result<Instance, EvalError> {
        if self.is_value_type(t) {
            return Err(EvalError::Type(format!("Val applied to value type `{t}`")));
        }
        if !self.object_types.contains(t) {
            return Err(EvalError::UnknownType(t.clone()));
        }
        Ok(Instance::abstract_of(t, v))
    }

    /// Adds the pairs needed to make `sub_of` transitive.
    pub fn close_sub_of(&mut self) {
        loop {
            let extra: Vec<(TypeId, TypeId)> = self
                .sub_of
                .iter()
                .flat_map(|(a, b)| {
                    self.sub_of
                        .iter()
                        .filter(move |(c, _)| c == b)
                        .map(move |(_, d)| (a.clone(), d.clone()))
                })
                .filter(|p| !self.sub_of.contains(p))
                .collect();
            if extra.is_empty() {
                return;
            }
            self.sub_of.extend(extra);
        }
    }

    /// The universe cut down to `keep`.
    pub fn restrict(&self, keep: &BTreeSet<TypeId>) -> Universe {
        let relationship_types: BTreeMap<TypeId, Vec<RoleId>> = self
            .relationship_types
            .iter()
            .filter(|(t, _)| keep.contains(*t))
            .map(|(t, rs)| (t.clone(), rs.clone()))
            .collect();
        let roles: BTreeSet<&RoleId> = relationship_types.values().flatten().collect();
        Universe {
            object_types: self.object_types.iter().filter(|t| keep.contains(*t)).cloned().collect(),
            value_types: self.value_types.iter().filter(|t| keep.contains(*t)).cloned().collect(),
            player: self.player.iter().filter(|(r, _)| roles.contains(r)).map(|(r, p)| (r.clone(), p.clone())).collect(),
            sub_of: self.sub_of.iter().filter(|(a, b)| keep.contains(a) && keep.contains(b)).cloned().collect(),
            relationship_types,
        }
    }

    /// For a relationship type named `T.l` with one role played by the
    /// entity type `T` and one by the value type `l`, the pair of roles
    /// `(entity role, value role)`. Such types carry the implicit reference
    /// scheme: every tuple pairs `Val(T, c)` with `c`.
    pub fn reference_roles(&self, rel: &TypeId) -> Option<(RoleId, RoleId, TypeId)> {
        let (ent, val) = rel.as_str().split_once('.')?;
        let roles = self.roles_of(rel)?;
        if roles.len() != 2 {
            return None;
        }
        let (ent, val) = (TypeId::from(ent), TypeId::from(val));
        if !self.is_entity_type(&ent) || !self.is_value_type(&val) {
            return None;
        }
        let p = |r: &RoleId| self.player.get(r);
        if p(&roles[0]) == Some(&ent) && p(&roles[1]) == Some(&val) {
            Some((roles[0].clone(), roles[1].clone(), ent))
        } else if p(&roles[1]) == Some(&ent) && p(&roles[0]) == Some(&val) {
            Some((roles[1].clone(), roles[0].clone(), ent))
        } else {
            None
        }
    }
}

/// A named domain. `None` is an unbounded domain.
pub type DomainValues = Option<BTreeSet<Value>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainDecl {
    pub name: String,
    pub values: DomainValues,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConstraintKind {
    /// Each combination of instances in the roles occurs at most once.
    Unique(Vec<RoleId>),
    /// Each instance of the players occurs in at least one of the roles.
    Mandatory(Vec<RoleId>),
    /// The population of the type is a subset of the listed values.
    EachIsIn(TypeId, Vec<Value>),
    Frequency { role: RoleId, min: u32, max: u32 },
    /// The role sets have pairwise disjoint populations.
    Exclusion(Vec<Vec<RoleId>>),
    /// Projection on the left roles is a subset of projection on the right.
    Subset(Vec<(RoleId, RoleId)>),
    Equality(Vec<(RoleId, RoleId)>),
    /// Uniqueness over roles of different relationship types joined on
    /// their common player.
    ExternalUnique(Vec<RoleId>),
    Cardinality(TypeId, u32),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Constraint {
    pub id: String,
    pub kind: ConstraintKind,
}

impl Constraint {
    pub fn new(id: impl Into<String>, kind: ConstraintKind) -> Self {
        Self { id: id.into(), kind }
    }

    pub fn roles(&self) -> Vec<RoleId> {
        match &self.kind {
            ConstraintKind::Unique(rs) | ConstraintKind::Mandatory(rs) | ConstraintKind::ExternalUnique(rs) => rs.clone(),
            ConstraintKind::Frequency { role, .. } => alloc::vec![role.clone()],
            ConstraintKind::Exclusion(sets) => sets.iter().flatten().cloned().collect(),
            ConstraintKind::Subset(ps) | ConstraintKind::Equality(ps) => {
                ps.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect()
            }
            ConstraintKind::EachIsIn(..) | ConstraintKind::Cardinality(..) => Vec::new(),
        }
    }

    /// Types the constraint talks about: the relationship types owning its
    /// roles and, for mandatory constraints, the players.
    pub fn referenced_types(&self, u: &Universe) -> BTreeSet<TypeId> {
        let mut out = BTreeSet::new();
        for r in self.roles() {
            if let Some(t) = u.rel_of(&r) {
                out.insert(t.clone());
            }
            if matches!(self.kind, ConstraintKind::Mandatory(_)) {
                if let Some(p) = u.player.get(&r) {
                    out.insert(p.clone());
                }
            }
        }
        if let ConstraintKind::EachIsIn(t, _) | ConstraintKind::Cardinality(t, _) = &self.kind {
            out.insert(t.clone());
        }
        out
    }

    /// Renames roles through `map`, leaving others alone.
    pub fn rename_roles(&self, map: &BTreeMap<RoleId, RoleId>) -> Constraint {
        let m = |r: &RoleId| map.get(r).cloned().unwrap_or_else(|| r.clone());
        let ms = |rs: &[RoleId]| rs.iter().map(m).collect::<Vec<_>>();
        let kind = match &self.kind {
            ConstraintKind::Unique(rs) => ConstraintKind::Unique(ms(rs)),
            ConstraintKind::Mandatory(rs) => ConstraintKind::Mandatory(ms(rs)),
            ConstraintKind::ExternalUnique(rs) => ConstraintKind::ExternalUnique(ms(rs)),
            ConstraintKind::Frequency { role, min, max } => ConstraintKind::Frequency { role: m(role), min: *min, max: *max },
            ConstraintKind::Exclusion(sets) => ConstraintKind::Exclusion(sets.iter().map(|s| ms(s)).collect()),
            ConstraintKind::Subset(ps) => ConstraintKind::Subset(ps.iter().map(|(a, b)| (m(a), m(b))).collect()),
            ConstraintKind::Equality(ps) => ConstraintKind::Equality(ps.iter().map(|(a, b)| (m(a), m(b))).collect()),
            k @ (ConstraintKind::EachIsIn(..) | ConstraintKind::Cardinality(..)) => k.clone(),
        };
        Constraint { id: self.id.clone(), kind }
    }
}

/// One version of an application schema.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    pub name: String,
    pub universe: Universe,
    pub internal: BTreeSet<TypeId>,
    pub constraints: Vec<Constraint>,
    pub derivation_rules: Vec<Rule>,
    pub update_rules: Vec<Rule>,
    /// Declared domains by name.
    pub domains: BTreeMap<String, DomainValues>,
    /// Domain assignment for value types.
    pub dom: BTreeMap<TypeId, String>,
}

impl Schema {
    pub fn types(&self) -> BTreeSet<TypeId> {
        self.universe.types()
    }

    pub fn derivation_rule(&self, t: &TypeId) -> Option<&Rule> {
        self.derivation_rules.iter().find(|r| &r.defines == t)
    }

    pub fn update_rule(&self, t: &TypeId) -> Option<&Rule> {
        self.update_rules.iter().find(|r| &r.defines == t)
    }

    pub fn constraint(&self, id: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.id == id)
    }

    /// Types defined by a derivation rule.
    pub fn ruled_types(&self) -> BTreeSet<TypeId> {
        self.derivation_rules.iter().map(|r| r.defines.clone()).collect()
    }

    /// Entity types whose population follows from derived relationship
    /// types: they play at least one role and every role they play belongs
    /// to a derived relationship type.
    pub fn induced_object_types(&self) -> BTreeSet<TypeId> {
        let ruled = self.ruled_types();
        self.universe
            .object_types
            .iter()
            .filter(|t| self.universe.is_entity_type(t) && !ruled.contains(*t))
            .filter(|t| {
                let roles = self.universe.roles_played_by(t);
                !roles.is_empty()
                    && roles.iter().all(|r| self.universe.rel_of(r).is_some_and(|rel| ruled.contains(rel)))
            })
            .cloned()
            .collect()
    }

    /// Types whose population is computed rather than given.
    pub fn derived_types(&self) -> BTreeSet<TypeId> {
        let mut out = self.ruled_types();
        out.extend(self.induced_object_types());
        out
    }

    /// Types that a base population assigns: entity types and relationship
    /// types that are neither ruled nor induced.
    pub fn base_types(&self) -> BTreeSet<TypeId> {
        let derived = self.derived_types();
        self.types()
            .into_iter()
            .filter(|t| !self.universe.is_value_type(t) && !derived.contains(t))
            .collect()
    }

    /// Relationship types a user populates directly.
    pub fn populatable_types(&self) -> BTreeSet<TypeId> {
        let ruled = self.ruled_types();
        self.universe.relationship_types.keys().filter(|t| !ruled.contains(*t)).cloned().collect()
    }

    /// Declared values of the domain assigned to a value type.
    pub fn domain_of(&self, v: &TypeId) -> Option<&DomainValues> {
        self.dom.get(v).and_then(|d| self.domains.get(d))
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn set(f: &mut fmt::Formatter<'_>, rs: &[RoleId]) -> fmt::Result {
            f.write_str("{")?;
            for (i, r) in rs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{r}")?;
            }
            f.write_str("}")
        }
        fn pairs(f: &mut fmt::Formatter<'_>, ps: &[(RoleId, RoleId)], op: &str) -> fmt::Result {
            for (i, (a, b)) in ps.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "({a} {op} {b})")?;
            }
            Ok(())
        }
        match self {
            ConstraintKind::Unique(rs) => {
                f.write_str("UNIQUE ")?;
                set(f, rs)
            }
            ConstraintKind::Mandatory(rs) => {
                f.write_str("MANDATORY ")?;
                set(f, rs)
            }
            ConstraintKind::ExternalUnique(rs) => {
                f.write_str("EXTUNIQUE ")?;
                set(f, rs)
            }
            ConstraintKind::EachIsIn(t, vs) => {
                write!(f, "EACH {t} IS IN ")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
            ConstraintKind::Frequency { role, min, max } => write!(f, "FREQUENCY {role} {min}..{max}"),
            ConstraintKind::Exclusion(sets) => {
                f.write_str("EXCLUSION")?;
                for s in sets {
                    f.write_str(" ")?;
                    set(f, s)?;
                }
                Ok(())
            }
            ConstraintKind::Subset(ps) => {
                f.write_str("SUBSET ")?;
                pairs(f, ps, "->")
            }
            ConstraintKind::Equality(ps) => {
                f.write_str("EQUALITY ")?;
                pairs(f, ps, "=")
            }
            ConstraintKind::Cardinality(t, n) => write!(f, "CARDINALITY {t} = {n}"),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, self.kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::HOSPITAL_A;

    fn universe(pairs: &[(&str, &str)]) -> Universe {
        let mut u = Universe::default();
        for t in ["A", "B", "C"] {
            u.object_types.insert(t.into());
        }
        u.sub_of = pairs.iter().map(|(a, b)| (TypeId::from(*a), TypeId::from(*b))).collect();
        u
    }

    #[test]
    fn direct_subtyping() {
        let id = |x: &str| TypeId::from(x);
        assert!(universe(&[("A", "B")]).sub_of_1(&id("A"), &id("B")).unwrap());
        assert!(!universe(&[("A", "B"), ("B", "C"), ("A", "C")]).sub_of_1(&id("A"), &id("C")).unwrap());
        assert!(universe(&[("A", "B"), ("B", "C"), ("A", "C")]).sub_of_1(&id("B"), &id("C")).unwrap());
        assert!(!universe(&[]).sub_of_1(&id("A"), &id("B")).unwrap());
        assert!(universe(&[]).sub_of_1(&id("A"), &id("Z")).is_err());
    }

    #[test]
    fn closing_sub_of() {
        let mut u = universe(&[("A", "B"), ("B", "C")]);
        u.close_sub_of();
        assert!(u.is_sub(&"A".into(), &"C".into()));
        assert_eq!(u.sub_of.len(), 3);
    }

    #[test]
    fn val_builds_abstract_instances() {
        let s = text::parse_schema("SCHEMA x ; DOMAINS char = { 'G' } ; OBJECT TYPES MedalKind ; VALUE TYPES code : char ; END").unwrap();
        let u = &s.universe;
        let g = u.val(&"MedalKind".into(), Value::str("G")).unwrap();
        assert_eq!(g, Instance::Abstract { ty: "MedalKind".into(), tag: Value::str("G") });
        assert_eq!(g, u.val(&"MedalKind".into(), Value::str("G")).unwrap());
        assert_ne!(g, Instance::Value(Value::str("G")));
        assert!(matches!(u.val(&"code".into(), Value::str("G")), Err(EvalError::Type(_))));
    }

    #[test]
    fn hospital_shape() {
        let s = text::parse_schema(HOSPITAL_A).unwrap();
        let u = &s.universe;
        assert_eq!(u.object_types.iter().filter(|t| u.is_entity_type(t)).count(), 1);
        assert_eq!(u.value_types.len(), 1);
        assert_eq!(u.roles_of(&"smokes".into()).unwrap().len(), 1);
        assert_eq!(u.roles_of(&"drinks".into()).unwrap().len(), 1);
        assert_eq!(u.rel_of(&"has-name-2".into()), Some(&TypeId::from("has-name")));
        assert_eq!(s.base_types().len(), 4);
    }

    #[test]
    fn empty_text_is_a_syntax_error() {
        assert!(matches!(text::parse_schema(""), Err(crate::error::ParseError::Syntax { .. })));
    }

    #[test]
    fn role_in_two_relationship_types_is_a_duplicate() {
        let src = "SCHEMA x ; OBJECT TYPES A ; RELATIONSHIP TYPES f = [ A : r ] ; g = [ A : r ] ; END";
        assert!(matches!(text::parse_schema(src), Err(crate::error::ParseError::DuplicateName(_))));
    }

    #[test]
    fn derived_and_induced_types() {
        let src = "SCHEMA x ; OBJECT TYPES A, M ;
            RELATIONSHIP TYPES f = [ A : f-1 ] ; g = [ A : g-1, M : g-2 ] ;
            DERIVATION RULES g = PROJ[g-1=f-1, g-2=Val(M,'k')] f ; END";
        let s = text::parse_schema(src).unwrap();
        assert_eq!(s.induced_object_types(), [TypeId::from("M")].into_iter().collect());
        assert_eq!(s.derived_types().len(), 2);
        assert_eq!(s.populatable_types(), [TypeId::from("f")].into_iter().collect());
    }
}
