use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{constraint::eval_constraint, tuple_text, Extent, Population};
use crate::bounds::Bounds;
use crate::error::EvalError;
use crate::name::TypeId;
use crate::rule::{eval, Env, Relation, Rule};
use crate::schema::{Schema, Universe};
use crate::value::{Instance, Value};

/// A schema together with the bounds that finitise its value types.
#[derive(Clone, Copy)]
pub struct Ctx<'a> {
    pub schema: &'a Schema,
    pub bounds: &'a Bounds,
}

impl<'a> Ctx<'a> {
    pub fn new(schema: &'a Schema, bounds: &'a Bounds) -> Self {
        Self { schema, bounds }
    }

    /// The domain of a value type, or `None` when it is unbounded.
    pub fn value_domain(&self, v: &TypeId) -> Option<BTreeSet<Value>> {
        let name = self.schema.dom.get(v)?;
        self.bounds.resolve(name, self.schema.domains.get(name))
    }

    /// Population of an object type; value types take their domain.
    pub fn objects(&self, pop: &Population, t: &TypeId) -> Result<BTreeSet<Instance>, EvalError> {
        if self.schema.universe.is_value_type(t) {
            return match self.value_domain(t) {
                Some(vs) => Ok(vs.into_iter().map(Instance::Value).collect()),
                None => Err(EvalError::Unbounded(t.clone())),
            };
        }
        match pop.get(t) {
            Some(Extent::Objects(s)) => Ok(s.clone()),
            Some(Extent::Tuples(_)) => Err(EvalError::Type(format!("{t} is populated by tuples"))),
            None if self.schema.universe.object_types.contains(t) => Err(EvalError::MissingBase(t.clone())),
            None => Err(EvalError::UnknownType(t.clone())),
        }
    }

    pub fn relation<'p>(&self, pop: &'p Population, t: &TypeId) -> Result<&'p Relation, EvalError> {
        match pop.get(t) {
            Some(Extent::Tuples(r)) => Ok(r),
            Some(Extent::Objects(_)) => Err(EvalError::Type(format!("{t} is populated by instances"))),
            None if self.schema.universe.is_relationship_type(t) => Err(EvalError::MissingBase(t.clone())),
            None => Err(EvalError::UnknownType(t.clone())),
        }
    }
}

struct PopEnv<'a> {
    u: &'a Universe,
    pop: &'a Population,
}

impl Env for PopEnv<'_> {
    fn relation(&self, t: &TypeId) -> Result<Relation, EvalError> {
        match self.pop.get(t) {
            Some(Extent::Tuples(r)) => Ok(r.clone()),
            Some(Extent::Objects(_)) => Err(EvalError::Type(format!("{t} is not a relationship type"))),
            None if self.u.is_relationship_type(t) => Err(EvalError::MissingBase(t.clone())),
            None => Err(EvalError::UnknownType(t.clone())),
        }
    }

    fn is_value_type(&self, t: &TypeId) -> bool {
        self.u.is_value_type(t)
    }
}

/// Evaluates a rule body against `pop` and shapes the result as the extent
/// of the type it defines.
pub(crate) fn eval_rule(u: &Universe, rule: &Rule, pop: &Population) -> Result<Extent, EvalError> {
    let r = eval(&rule.body, &PopEnv { u, pop })?;
    if let Some(roles) = u.roles_of(&rule.defines) {
        return Ok(Extent::Tuples(r.aligned(roles)?));
    }
    if u.is_entity_type(&rule.defines) {
        if r.is_polymorphic_empty() {
            return Ok(Extent::Objects(BTreeSet::new()));
        }
        if r.columns.len() != 1 {
            return Err(EvalError::Columns(format!("rule for {} must yield one column", rule.defines)));
        }
        return Ok(Extent::Objects(r.tuples.into_iter().map(|mut t| t.remove(0)).collect()));
    }
    Err(EvalError::UnknownType(rule.defines.clone()))
}

/// Derivation rules in dependency order.
pub(crate) fn ordered_rules(s: &Schema) -> Result<Vec<&Rule>, EvalError> {
    let by_type: BTreeMap<&TypeId, &Rule> = s.derivation_rules.iter().map(|r| (&r.defines, r)).collect();
    let mut out = Vec::new();
    let mut state: BTreeMap<&TypeId, u8> = BTreeMap::new();
    fn visit<'a>(
        t: &'a TypeId,
        by_type: &BTreeMap<&'a TypeId, &'a Rule>,
        state: &mut BTreeMap<&'a TypeId, u8>,
        out: &mut Vec<&'a Rule>,
        path: &mut Vec<TypeId>,
    ) -> Result<(), EvalError> {
        match state.get(t) {
            Some(2) => return Ok(()),
            Some(1) => {
                let i = path.iter().position(|p| p == t).unwrap_or(0);
                let mut cyc = path[i..].to_vec();
                cyc.push(t.clone());
                return Err(EvalError::Cycle(cyc));
            }
            _ => {}
        }
        let r = by_type[t];
        state.insert(t, 1);
        path.push(t.clone());
        for d in r.body.references() {
            if let Some((k, _)) = by_type.get_key_value(&d) {
                visit(k, by_type, state, out, path)?;
            }
        }
        path.pop();
        state.insert(t, 2);
        out.push(r);
        Ok(())
    }
    for t in by_type.keys() {
        visit(t, &by_type, &mut state, &mut out, &mut Vec::new())?;
    }
    Ok(out)
}

/// Entity types ordered so that subtypes come before their supertypes.
pub(crate) fn subtypes_first(u: &Universe, types: &BTreeSet<TypeId>) -> Vec<TypeId> {
    let mut v: Vec<TypeId> = types.iter().cloned().collect();
    v.sort_by_key(|t| u.subtypes(t).len());
    v
}

/// Adds the derived types to a base population.
///
/// Derivation rules run in dependency order; induced entity types then
/// receive the instances playing their roles plus those of their subtypes.
/// Entries for derived types already present in `base` are recomputed, so
/// the function is idempotent.
pub fn extend_with_derivations(s: &Schema, base: &Population) -> Result<Population, EvalError> {
    let derived = s.derived_types();
    for t in s.base_types() {
        if base.get(&t).is_none() {
            return Err(EvalError::MissingBase(t));
        }
    }
    let mut out = Population {
        extents: base.extents.iter().filter(|(t, _)| !derived.contains(*t)).map(|(t, e)| (t.clone(), e.clone())).collect(),
    };
    for r in ordered_rules(s)? {
        let e = eval_rule(&s.universe, r, &out)?;
        out.extents.insert(r.defines.clone(), e);
    }
    let u = &s.universe;
    for t in subtypes_first(u, &s.induced_object_types()) {
        let mut xs = BTreeSet::new();
        for r in u.roles_played_by(&t) {
            if let Some(rel) = u.rel_of(&r).and_then(|rel| out.relation(rel)) {
                xs.extend(rel.column(&r));
            }
        }
        for sub in u.subtypes(&t) {
            if let Some(ys) = out.objects(&sub) {
                xs.extend(ys.iter().cloned());
            }
        }
        out.extents.insert(t, Extent::Objects(xs));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PopKind {
    /// Assigns exactly the base types; derived types are computed.
    Base,
    /// Assigns every non-value type.
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub check: String,
    pub witness: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PopReport {
    pub violations: Vec<Violation>,
}

impl PopReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, check: impl Into<String>, witness: String) {
        self.violations.push(Violation { check: check.into(), witness });
    }
}

/// Checks that `pop` is a population of the schema: conformity to the
/// information structure, subtyping, the implicit reference schemes,
/// derivation consistency and every constraint.
pub fn is_pop(ctx: &Ctx<'_>, pop: &Population, kind: PopKind) -> Result<PopReport, EvalError> {
    let s = ctx.schema;
    let mut rep = PopReport::default();
    let full = match kind {
        PopKind::Base => {
            let derived = s.derived_types();
            for t in pop.extents.keys().filter(|t| derived.contains(*t)) {
                rep.push("base", format!("{t} is derived"));
            }
            extend_with_derivations(s, pop)?
        }
        PopKind::Full => {
            let again = extend_with_derivations(s, pop)?;
            for t in s.derived_types() {
                if pop.get(&t) != again.get(&t) {
                    rep.push("derivation", format!("{t} differs from its derivation"));
                }
            }
            pop.clone()
        }
    };
    check_full(ctx, &full, &mut rep)?;
    Ok(rep)
}

pub(crate) fn check_full(ctx: &Ctx<'_>, full: &Population, rep: &mut PopReport) -> Result<(), EvalError> {
    let s = ctx.schema;
    let u = &s.universe;
    let types = s.types();
    for t in full.extents.keys() {
        if !types.contains(t) {
            rep.push("presence", format!("{t} is not a type of the schema"));
        }
    }
    for t in &types {
        if u.is_value_type(t) {
            if let (Some(e), Some(dom)) = (full.get(t), ctx.value_domain(t)) {
                let ok = match e {
                    Extent::Objects(xs) => xs.iter().all(|x| x.as_value().is_some_and(|v| dom.contains(v))),
                    Extent::Tuples(_) => false,
                };
                if !ok {
                    rep.push("domain", format!("{t} is populated outside its domain"));
                }
            }
            continue;
        }
        match (full.get(t), u.roles_of(t)) {
            (None, _) => rep.push("presence", format!("{t} has no extent")),
            (Some(Extent::Objects(xs)), None) => {
                if let Some(x) = xs.iter().find(|x| !x.is_abstract()) {
                    rep.push("conformity", format!("{t} contains the literal {x}"));
                }
            }
            (Some(Extent::Tuples(r)), Some(roles)) => {
                let Ok(r) = r.aligned(roles) else {
                    rep.push("conformity", format!("{t} has columns {:?}", r.columns));
                    continue;
                };
                for (i, role) in roles.iter().enumerate() {
                    let Some(p) = u.player.get(role) else { continue };
                    if u.is_value_type(p) {
                        let dom = ctx.value_domain(p);
                        for tup in &r.tuples {
                            let ok = match (&tup[i], &dom) {
                                (Instance::Value(v), Some(d)) => d.contains(v),
                                (Instance::Value(_), None) => true,
                                _ => false,
                            };
                            if !ok {
                                rep.push("conformity", format!("{t}: {} outside {p}", tuple_text(roles, tup)));
                            }
                        }
                    } else {
                        let Some(xs) = full.objects(p) else { continue };
                        for tup in &r.tuples {
                            if !xs.contains(&tup[i]) {
                                rep.push("conformity", format!("{t}: {} not in {p}", tuple_text(roles, tup)));
                            }
                        }
                    }
                }
                if let Some((er, vr, ent)) = u.reference_roles(t) {
                    let (ei, vi) = (r.index_of(&er).unwrap(), r.index_of(&vr).unwrap());
                    for tup in &r.tuples {
                        let ok = matches!((&tup[ei], &tup[vi]), (Instance::Abstract { ty, tag }, Instance::Value(v)) if *ty == ent && tag == v);
                        if !ok {
                            rep.push("reference", format!("{t}: {}", tuple_text(roles, tup)));
                        }
                    }
                }
            }
            (Some(_), _) => rep.push("conformity", format!("{t} has the wrong kind of extent")),
        }
    }
    for (a, b) in &u.sub_of {
        if let (Some(xa), Some(xb)) = (full.objects(a), full.objects(b)) {
            if let Some(x) = xa.difference(xb).next() {
                rep.push("subtype", format!("{x} in {a} but not in {b}"));
            }
        }
    }
    for k in &s.constraints {
        if let Some(w) = eval_constraint(ctx, full, k)? {
            rep.push(k.id.to_string(), w);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::parse_population;
    use crate::schema::parse_schema;
    use crate::testing::{GEN_ORM, HOSPITAL_A};

    const NAMED: &str = "POPULATION p ;
        Patient = { Val(Patient,'P0') } ;
        has-name = { <has-name-1 = Val(Patient,'P0'), has-name-2 = 'a'> } ;
        smokes = {} ;
        drinks = { <drinks-1 = Val(Patient,'P0')> } ;
        END";

    #[test]
    fn named_patient_is_valid() {
        let s = parse_schema(HOSPITAL_A).unwrap();
        let b = Bounds::default();
        let p = parse_population(NAMED, &s).unwrap();
        assert!(is_pop(&Ctx::new(&s, &b), &p, PopKind::Base).unwrap().ok());
    }

    #[test]
    fn unnamed_patient_violates_mandatory() {
        let s = parse_schema(HOSPITAL_A).unwrap();
        let b = Bounds::default();
        let src = NAMED.replace("<has-name-1 = Val(Patient,'P0'), has-name-2 = 'a'>", "");
        let rep = is_pop(&Ctx::new(&s, &b), &parse_population(&src, &s).unwrap(), PopKind::Base).unwrap();
        assert_eq!(rep.violations.len(), 1);
        assert!(rep.violations[0].check.contains("n2"), "{:?}", rep.violations);
        assert!(rep.violations[0].witness.contains("P0"), "{:?}", rep.violations);
    }

    #[test]
    fn empty_population_against_cardinality_one() {
        let s = parse_schema(GEN_ORM).unwrap();
        let b = Bounds::default();
        let empty = parse_population("POPULATION e ; Number = {} ; Number.Nat = {} ; END", &s).unwrap();
        assert!(!is_pop(&Ctx::new(&s, &b), &empty, PopKind::Base).unwrap().ok());
        let h = parse_schema(HOSPITAL_A).unwrap();
        let empty = parse_population("POPULATION e ; Patient = {} ; has-name = {} ; smokes = {} ; drinks = {} ; END", &h).unwrap();
        assert!(is_pop(&Ctx::new(&h, &b), &empty, PopKind::Base).unwrap().ok());
    }

    const DERIVED: &str = "SCHEMA d ;
        OBJECT TYPES A ;
        RELATIONSHIP TYPES f = [ A : f-1 ] ; g = [ A : g-1 ] ;
        DERIVATION RULES g = PROJ[g-1=f-1] f ;
        END";

    #[test]
    fn derivations_extend_and_are_idempotent() {
        let s = parse_schema(DERIVED).unwrap();
        let base = parse_population("POPULATION p ; A = { Val(A,'x') } ; f = { <f-1 = Val(A,'x')> } ; END", &s).unwrap();
        let full = extend_with_derivations(&s, &base).unwrap();
        assert_eq!(full.relation(&"g".into()).unwrap().len(), 1);
        assert_eq!(extend_with_derivations(&s, &full).unwrap(), full);
        let b = Bounds::default();
        assert!(is_pop(&Ctx::new(&s, &b), &full, PopKind::Full).unwrap().ok());
    }

    #[test]
    fn no_rules_leaves_the_base_alone() {
        let s = parse_schema(HOSPITAL_A).unwrap();
        let p = parse_population(NAMED, &s).unwrap();
        assert_eq!(extend_with_derivations(&s, &p).unwrap(), p);
    }

    #[test]
    fn missing_base_type_is_an_error() {
        let s = parse_schema(DERIVED).unwrap();
        let base = parse_population("POPULATION p ; A = {} ; END", &s).unwrap();
        assert!(matches!(extend_with_derivations(&s, &base), Err(EvalError::MissingBase(_)) | Err(EvalError::UnknownType(_))));
    }

    #[test]
    fn stored_derived_type_must_match_its_rule() {
        let s = parse_schema(DERIVED).unwrap();
        let p = parse_population("POPULATION p ; A = { Val(A,'x') } ; f = {} ; g = { <g-1 = Val(A,'x')> } ; END", &s).unwrap();
        let b = Bounds::default();
        let rep = is_pop(&Ctx::new(&s, &b), &p, PopKind::Full).unwrap();
        assert_eq!(rep.violations[0].check, "derivation");
    }
}
