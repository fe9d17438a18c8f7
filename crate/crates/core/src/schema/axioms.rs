//! Well-formedness axioms for universes, information structures and schemas.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Schema, Universe};
use crate::name::TypeId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub witnesses: Vec<String>,
}

impl AxiomCheck {
    pub fn passed(&self) -> bool {
        self.witnesses.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(AxiomCheck::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn get(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &'static str, witnesses: Vec<String>) {
        self.checks.push(AxiomCheck { name, witnesses });
    }

    pub fn extend(&mut self, other: AxiomReport) {
        self.checks.extend(other.checks);
    }
}

/// Finds a cycle in a directed graph, returned as a closed path.
fn find_cycle(edges: &BTreeMap<TypeId, BTreeSet<TypeId>>) -> Option<Vec<TypeId>> {
    fn dfs(
        n: &TypeId,
        edges: &BTreeMap<TypeId, BTreeSet<TypeId>>,
        state: &mut BTreeMap<TypeId, u8>,
        path: &mut Vec<TypeId>,
    ) -> Option<Vec<TypeId>> {
        state.insert(n.clone(), 1);
        path.push(n.clone());
        for m in edges.get(n).into_iter().flatten() {
            match state.get(m).copied().unwrap_or(0) {
                1 => {
                    let i = path.iter().position(|p| p == m).unwrap();
                    let mut cyc = path[i..].to_vec();
                    cyc.push(m.clone());
                    return Some(cyc);
                }
                0 => {
                    if let Some(c) = dfs(m, edges, state, path) {
                        return Some(c);
                    }
                }
                _ => {}
            }
        }
        path.pop();
        state.insert(n.clone(), 2);
        None
    }
    let mut state = BTreeMap::new();
    for n in edges.keys() {
        if state.get(n).copied().unwrap_or(0) == 0 {
            if let Some(c) = dfs(n, edges, &mut state, &mut Vec::new()) {
                return Some(c);
            }
        }
    }
    None
}

fn arrow_path(p: &[TypeId]) -> String {
    p.iter().map(|t| t.as_str()).collect::<Vec<_>>().join("->")
}

/// The universe axioms.
pub fn validate_universe(u: &Universe) -> AxiomReport {
    let mut rep = AxiomReport::default();

    rep.push(
        "ISU type exclusion",
        u.relationship_types.keys().filter(|t| u.object_types.contains(*t)).map(|t| format!("{t} is both")).collect(),
    );

    let mut w = Vec::new();
    for v in &u.value_types {
        if !u.object_types.contains(v) {
            w.push(format!("value type {v} is not an object type"));
        }
    }
    for (a, b) in &u.sub_of {
        for t in [a, b] {
            if !u.object_types.contains(t) {
                w.push(format!("{a} < {b}: {t} is not an object type"));
            }
        }
    }
    rep.push("ISU type classes", w);

    let mut w = Vec::new();
    let mut seen: BTreeMap<&crate::name::RoleId, &TypeId> = BTreeMap::new();
    for (t, roles) in &u.relationship_types {
        if roles.is_empty() {
            w.push(format!("{t} has no roles"));
        }
        for r in roles {
            if let Some(prev) = seen.insert(r, t) {
                w.push(format!("role {r} in both {prev} and {t}"));
            }
        }
    }
    for r in u.player.keys() {
        if !seen.contains_key(r) {
            w.push(format!("role {r} belongs to no relationship type"));
        }
    }
    rep.push("ISU role partition", w);

    let mut w = Vec::new();
    for r in seen.keys() {
        match u.player.get(*r) {
            None => w.push(format!("role {r} has no player")),
            Some(p) if !u.contains(p) => w.push(format!("player {p} of {r} is not a type")),
            _ => {}
        }
    }
    rep.push("ISU player range", w);

    let mut w = Vec::new();
    for (a, b) in &u.sub_of {
        for (c, d) in &u.sub_of {
            if b == c && !u.sub_of.contains(&(a.clone(), d.clone())) {
                w.push(format!("{a} < {b} < {d} but not {a} < {d}"));
            }
        }
    }
    rep.push("ISU transitive", w);

    rep.push("ISU irreflexive", u.sub_of.iter().filter(|(a, b)| a == b).map(|(a, _)| format!("{a} < {a}")).collect());

    let mut w = Vec::new();
    for (a, b) in &u.sub_of {
        if u.is_value_type(a) != u.is_value_type(b) {
            w.push(format!("{a} < {b} mixes value and entity types"));
        }
    }
    rep.push("ISU separation", w);

    let mut edges: BTreeMap<TypeId, BTreeSet<TypeId>> = BTreeMap::new();
    for (a, b) in &u.sub_of {
        if a != b {
            edges.entry(a.clone()).or_default().insert(b.clone());
        }
    }
    rep.push("ISU identification induction", find_cycle(&edges).map(|c| alloc::vec![arrow_path(&c)]).unwrap_or_default());
    rep
}

/// Information-structure axioms for the type set `types` within `u`.
pub fn is_is(u: &Universe, types: &BTreeSet<TypeId>) -> AxiomReport {
    let mut rep = AxiomReport::default();

    let mut w = Vec::new();
    for (t, roles) in u.relationship_types.iter().filter(|(t, _)| types.contains(*t)) {
        for r in roles {
            match u.player.get(r) {
                Some(p) if types.contains(p) => {}
                Some(p) => w.push(format!("{t}: player {p} of {r} is missing")),
                None => w.push(format!("{t}: role {r} has no player")),
            }
        }
    }
    rep.push("ISV player presence", w);

    let mut w = Vec::new();
    for x in types.iter().filter(|x| u.object_types.contains(*x)) {
        let sups = u.supertypes(x);
        if !sups.is_empty() && !sups.iter().any(|y| types.contains(y)) {
            w.push(format!("no supertype of {x} is present"));
        }
    }
    rep.push("ISV supertype presence", w);

    let mut w = Vec::new();
    if types.is_empty() {
        w.push("empty type set".to_string());
    } else {
        let mut adj: BTreeMap<&TypeId, Vec<&TypeId>> = BTreeMap::new();
        let mut link = |a: &TypeId, b: &TypeId| {
            if let (Some(a), Some(b)) = (types.get(a), types.get(b)) {
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
        };
        for (t, roles) in &u.relationship_types {
            for r in roles {
                if let Some(p) = u.player.get(r) {
                    link(p, t);
                }
            }
        }
        for (a, b) in &u.sub_of {
            link(a, b);
        }
        let mut comps: Vec<Vec<&TypeId>> = Vec::new();
        let mut seen: BTreeSet<&TypeId> = BTreeSet::new();
        for start in types {
            if seen.contains(start) {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = alloc::vec![start];
            seen.insert(start);
            while let Some(n) = stack.pop() {
                comp.push(n);
                for m in adj.get(n).into_iter().flatten() {
                    if seen.insert(m) {
                        stack.push(m);
                    }
                }
            }
            comp.sort();
            comps.push(comp);
        }
        if comps.len() > 1 {
            for c in comps {
                w.push(format!("component {{{}}}", c.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(", ")));
            }
        }
    }
    rep.push("ISV connectivity", w);
    rep
}

/// Schema-version axioms, including the information-structure axioms on
/// the schema's types and the checks evaluation relies on.
pub fn is_sch(s: &Schema) -> AxiomReport {
    let u = &s.universe;
    let types = s.types();
    let mut rep = AxiomReport::default();

    let mut w = Vec::new();
    for v in &u.value_types {
        match s.dom.get(v) {
            None => w.push(format!("value type {v} has no domain")),
            Some(d) if !s.domains.contains_key(d) => w.push(format!("domain {d} of {v} is not declared")),
            _ => {}
        }
    }
    for v in s.dom.keys() {
        if !u.value_types.contains(v) {
            w.push(format!("{v} has a domain but is not a value type"));
        }
    }
    rep.push("CSV complete domain assignment", w);

    let mut w = Vec::new();
    for (kind, rules) in [("derivation", &s.derivation_rules), ("update", &s.update_rules)] {
        let mut seen = BTreeSet::new();
        for r in rules.iter() {
            if !seen.insert(&r.defines) {
                w.push(format!("two {kind} rules for {}", r.defines));
            }
        }
    }
    rep.push("CSV unique rules", w);

    let defined: BTreeSet<&TypeId> = s.update_rules.iter().map(|r| &r.defines).collect();
    rep.push(
        "CSV update rule completeness",
        s.populatable_types()
            .iter()
            .filter(|t| s.internal.contains(*t) && !defined.contains(t))
            .map(|t| format!("internal type {t} has no update rule"))
            .collect(),
    );

    rep.push(
        "internal types",
        s.internal.iter().filter(|t| !types.contains(*t)).map(|t| format!("{t} is not a type")).collect(),
    );

    let mut w = Vec::new();
    for (kind, rules) in [("derivation", &s.derivation_rules), ("update", &s.update_rules)] {
        for r in rules.iter() {
            if !(u.is_relationship_type(&r.defines) || u.is_entity_type(&r.defines)) {
                w.push(format!("{kind} rule defines {}, which is not a relationship or entity type", r.defines));
            }
            for d in r.depends() {
                if !types.contains(&d) {
                    w.push(format!("{kind} rule for {} reads unknown type {d}", r.defines));
                }
            }
        }
    }
    rep.push("rule scope", w);

    let ruled = s.ruled_types();
    let mut edges: BTreeMap<TypeId, BTreeSet<TypeId>> = BTreeMap::new();
    for r in &s.derivation_rules {
        let e = edges.entry(r.defines.clone()).or_default();
        e.extend(r.body.references().into_iter().filter(|d| ruled.contains(d)));
    }
    rep.push("rule acyclicity", find_cycle(&edges).map(|c| alloc::vec![arrow_path(&c)]).unwrap_or_default());

    let mut w = Vec::new();
    for k in &s.constraints {
        for r in k.roles() {
            if u.rel_of(&r).is_none() {
                w.push(format!("{}: unknown role {r}", k.id));
            }
        }
        if let super::ConstraintKind::EachIsIn(t, _) | super::ConstraintKind::Cardinality(t, _) = &k.kind {
            if !u.object_types.contains(t) {
                w.push(format!("{}: unknown object type {t}", k.id));
            }
        }
    }
    rep.push("constraint references", w);

    rep.extend(is_is(u, &types));
    rep
}

/// Universe axioms followed by the schema axioms.
pub fn validate(s: &Schema) -> AxiomReport {
    let mut rep = validate_universe(&s.universe);
    rep.extend(is_sch(s));
    rep
}
