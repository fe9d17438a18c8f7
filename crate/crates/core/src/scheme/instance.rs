//! Instantiation, fragments and inversion.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::parlist::{bind, Bound, Env};
use super::template::{expand, Resolve};
use super::{ParList, SchemeError, Section, Shape, TransformationScheme};
use crate::error::ParseError;
use crate::lex::{Cursor, Punct, Tok, Token};
use crate::name::{RoleId, TypeId};
use crate::rule::{parse_rule_at, Rule};
use crate::schema::{parse_constraint_at, Constraint, Schema, Universe};

/// One entry of the instantiation table, e.g. `r[1,2] = won-silver-in-1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SymbolBinding {
    pub symbol: String,
    pub indices: Vec<usize>,
    pub value: String,
}

impl fmt::Display for SymbolBinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol)?;
        if !self.indices.is_empty() {
            let ix: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
            write!(f, "[{}]", ix.join(","))?;
        }
        write!(f, " = {}", self.value)
    }
}

/// A scheme with all parameters and arities fixed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InstantiatedTransformation {
    pub name: String,
    pub object_types: Vec<TypeId>,
    pub value_types: Vec<(TypeId, Option<String>)>,
    pub relationship_types: Vec<(TypeId, Vec<(TypeId, RoleId)>)>,
    pub constraints: Vec<Constraint>,
    pub from: Vec<String>,
    pub to: Vec<String>,
    pub derivation_rules: Vec<Rule>,
    pub update_rules: Vec<Rule>,
    pub bindings: Vec<SymbolBinding>,
}

struct Resolver<'a> {
    scheme: &'a TransformationScheme,
    env: &'a Env,
    rels: BTreeMap<String, Vec<String>>,
    rel_names: Option<&'a BTreeMap<(String, Vec<usize>), String>>,
}

fn index_of(name: &str, var: &str, idx: &BTreeMap<String, usize>, at: &Token) -> Result<usize, SchemeError> {
    idx.get(var).copied().ok_or_else(|| {
        SchemeError::ArityNotation(format!("{name} at {}:{} is used outside a repetition over {var}", at.line, at.col))
    })
}

impl Resolve for Resolver<'_> {
    fn arity(&self, var: &str) -> Option<usize> {
        self.env.arity.get(var).copied()
    }

    fn resolve(&self, name: &str, idx: &BTreeMap<String, usize>, at: &Token) -> Result<Option<Tok>, SchemeError> {
        if let Some(k) = self.env.arity.get(name) {
            if !self.scheme.params.iter().any(|p| p.name == name) {
                return Ok(Some(Tok::Int(*k as i64)));
            }
        }
        if let Some(p) = self.scheme.param(name) {
            let tok = match (&p.shape, &self.env.values[name]) {
                (Shape::Scalar, Bound::Scalar(t)) => t.clone(),
                (Shape::Vector(v), Bound::Vector(xs)) => xs[index_of(name, v, idx, at)? - 1].clone(),
                (Shape::Matrix { inner, outer }, Bound::Matrix(rows)) => {
                    let (i, j) = (index_of(name, inner, idx, at)?, index_of(name, outer, idx, at)?);
                    rows[j - 1][i - 1].clone()
                }
                _ => unreachable!("binding shape follows the parameter"),
            };
            return Ok(Some(tok));
        }
        if let Some(vars) = self.rels.get(name) {
            let ix = vars.iter().map(|v| index_of(name, v, idx, at)).collect::<Result<Vec<_>, _>>()?;
            return Ok(Some(Tok::Ident(match self.rel_names {
                Some(names) => names[&(name.to_string(), ix)].clone(),
                None => placeholder(name, &ix),
            })));
        }
        Ok(None)
    }
}

fn placeholder(name: &str, ix: &[usize]) -> String {
    let parts: Vec<String> = ix.iter().map(|i| i.to_string()).collect();
    format!("@{name}#{}", parts.join("."))
}

fn section_tokens(s: &TransformationScheme, sec: Section, r: &Resolver<'_>) -> Result<Vec<Token>, SchemeError> {
    let mut out = Vec::new();
    if let Some(nodes) = s.sections.get(&sec) {
        expand(nodes, r, &mut out)?;
    }
    Ok(out)
}

fn eat_sep(c: &mut Cursor) -> bool {
    c.eat_punct(Punct::Comma) || c.eat_punct(Punct::Semi)
}

fn name_list(toks: Vec<Token>) -> Result<Vec<String>, ParseError> {
    let mut c = Cursor::new(toks);
    let mut out = Vec::new();
    while !c.at_end() {
        out.push(c.ident()?);
        if !eat_sep(&mut c) {
            break;
        }
    }
    c.expect_end()?;
    Ok(out)
}

type RelItem = (String, Vec<(TypeId, RoleId)>);

fn rel_items(toks: Vec<Token>) -> Result<Vec<RelItem>, ParseError> {
    let mut c = Cursor::new(toks);
    let mut out = Vec::new();
    while !c.at_end() {
        let name = c.ident()?;
        c.expect_punct(Punct::Eq)?;
        c.expect_punct(Punct::LBracket)?;
        let mut roles = Vec::new();
        loop {
            let p = TypeId::new(c.ident()?);
            c.expect_punct(Punct::Colon)?;
            roles.push((p, RoleId::new(c.ident()?)));
            if !c.eat_punct(Punct::Comma) {
                break;
            }
        }
        c.expect_punct(Punct::RBracket)?;
        out.push((name, roles));
        if !eat_sep(&mut c) {
            break;
        }
    }
    c.expect_end()?;
    Ok(out)
}

fn value_types(toks: Vec<Token>) -> Result<Vec<(TypeId, Option<String>)>, ParseError> {
    let mut c = Cursor::new(toks);
    let mut out = Vec::new();
    while !c.at_end() {
        let t = TypeId::new(c.ident()?);
        let d = if c.eat_punct(Punct::Colon) { Some(c.ident()?) } else { None };
        out.push((t, d));
        if !eat_sep(&mut c) {
            break;
        }
    }
    c.expect_end()?;
    Ok(out)
}

fn constraints(toks: Vec<Token>) -> Result<Vec<Constraint>, ParseError> {
    let mut c = Cursor::new(toks);
    let mut out = Vec::new();
    while !c.at_end() {
        out.push(parse_constraint_at(&mut c)?);
        if !eat_sep(&mut c) {
            break;
        }
    }
    c.expect_end()?;
    Ok(out)
}

fn rules(toks: Vec<Token>) -> Result<Vec<Rule>, ParseError> {
    let mut c = Cursor::new(toks);
    let mut out = Vec::new();
    while !c.at_end() {
        out.push(parse_rule_at(&mut c)?);
        if !eat_sep(&mut c) {
            break;
        }
    }
    c.expect_end()?;
    Ok(out)
}

/// Name for a relationship type given by its roles: the context type with
/// exactly these roles, or else the common stem of the role names.
fn name_relationship(roles: &[(TypeId, RoleId)], context: Option<&Universe>) -> Result<String, SchemeError> {
    let set: BTreeSet<&RoleId> = roles.iter().map(|(_, r)| r).collect();
    if let Some(u) = context {
        for (t, rs) in &u.relationship_types {
            if rs.len() == set.len() && rs.iter().all(|r| set.contains(r)) {
                return Ok(t.0.clone());
            }
        }
    }
    let stems: BTreeSet<&str> = roles.iter().map(|(_, r)| r.stem()).collect();
    match stems.into_iter().collect::<Vec<_>>().as_slice() {
        [one] if roles.iter().all(|(_, r)| r.as_str() != *one) => Ok((*one).to_string()),
        _ => Err(SchemeError::Naming(format!(
            "roles {:?} neither match a context relationship type nor share a stem",
            roles.iter().map(|(_, r)| r.as_str()).collect::<Vec<_>>()
        ))),
    }
}

/// Fixes the parameters of `scheme` from `list`. Template relationship
/// names are taken from `context` when it has a relationship type with
/// the same roles, and from the role names otherwise.
pub fn instantiate(
    scheme: &TransformationScheme,
    list: &ParList,
    context: Option<&Schema>,
) -> Result<InstantiatedTransformation, SchemeError> {
    let env = bind(&scheme.params, list)?;
    let mut r = Resolver { scheme, env: &env, rels: scheme.relationship_templates(), rel_names: None };

    let raw_rels = rel_items(section_tokens(scheme, Section::RelationshipTypes, &r)?)?;
    let mut rel_names: BTreeMap<(String, Vec<usize>), String> = BTreeMap::new();
    let mut relationship_types = Vec::new();
    for (name, roles) in raw_rels {
        let concrete = match name.strip_prefix('@') {
            Some(ph) => {
                let n = name_relationship(&roles, context.map(|s| &s.universe))?;
                let (sym, ix) = ph.split_once('#').unwrap();
                let ix: Vec<usize> = if ix.is_empty() { Vec::new() } else { ix.split('.').map(|k| k.parse().unwrap()).collect() };
                rel_names.insert((sym.to_string(), ix), n.clone());
                n
            }
            None => name,
        };
        relationship_types.push((TypeId::new(concrete), roles));
    }
    r.rel_names = Some(&rel_names);

    let mut object_types: Vec<TypeId> = name_list(section_tokens(scheme, Section::ObjectTypes, &r)?)?.into_iter().map(TypeId::new).collect();
    let value_types = value_types(section_tokens(scheme, Section::ValueTypes, &r)?)?;
    for (v, _) in &value_types {
        if !object_types.contains(v) {
            object_types.push(v.clone());
        }
    }
    let mut inst = InstantiatedTransformation {
        name: scheme.name.clone(),
        object_types,
        value_types,
        relationship_types,
        constraints: constraints(section_tokens(scheme, Section::Constraints, &r)?)?,
        from: name_list(section_tokens(scheme, Section::From, &r)?)?,
        to: name_list(section_tokens(scheme, Section::To, &r)?)?,
        derivation_rules: rules(section_tokens(scheme, Section::DerivationRules, &r)?)?,
        update_rules: rules(section_tokens(scheme, Section::UpdateRules, &r)?)?,
        bindings: Vec::new(),
    };
    inst.bindings = bindings(scheme, &env, &rel_names);
    inst.check()?;
    Ok(inst)
}

fn tok_text(t: &Tok) -> String {
    format!("{t}")
}

fn bindings(scheme: &TransformationScheme, env: &Env, rels: &BTreeMap<(String, Vec<usize>), String>) -> Vec<SymbolBinding> {
    let mut out = Vec::new();
    for p in &scheme.params {
        let b = |indices: Vec<usize>, t: &Tok| SymbolBinding { symbol: p.name.clone(), indices, value: tok_text(t) };
        match &env.values[&p.name] {
            Bound::Scalar(t) => out.push(b(Vec::new(), t)),
            Bound::Vector(xs) => out.extend(xs.iter().enumerate().map(|(i, t)| b(alloc::vec![i + 1], t))),
            Bound::Matrix(rows) => {
                for (j, row) in rows.iter().enumerate() {
                    out.extend(row.iter().enumerate().map(|(i, t)| b(alloc::vec![i + 1, j + 1], t)));
                }
            }
        }
    }
    for ((sym, ix), v) in rels {
        out.push(SymbolBinding { symbol: sym.clone(), indices: ix.clone(), value: v.clone() });
    }
    out
}

/// Inverse transformation: From and To swap, and so do the rule sets.
pub fn invert(t: &InstantiatedTransformation) -> Result<InstantiatedTransformation, SchemeError> {
    if t.derivation_rules.is_empty() {
        return Err(SchemeError::MissingRules("derivation"));
    }
    if t.update_rules.is_empty() {
        return Err(SchemeError::MissingRules("update"));
    }
    let mut out = t.clone();
    core::mem::swap(&mut out.from, &mut out.to);
    core::mem::swap(&mut out.derivation_rules, &mut out.update_rules);
    Ok(out)
}

/// Components selected from an instantiated transformation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Fragment {
    pub types: BTreeSet<TypeId>,
    pub domains: BTreeSet<String>,
    pub constraints: Vec<Constraint>,
    pub derivation_rules: Vec<Rule>,
    pub update_rules: Vec<Rule>,
}

impl InstantiatedTransformation {
    pub fn declared_types(&self) -> BTreeSet<TypeId> {
        let mut out: BTreeSet<TypeId> = self.object_types.iter().cloned().collect();
        out.extend(self.relationship_types.iter().map(|(t, _)| t.clone()));
        out
    }

    pub fn domain_names(&self) -> BTreeSet<String> {
        self.value_types.iter().filter_map(|(_, d)| d.clone()).collect()
    }

    pub fn is_value_type(&self, t: &TypeId) -> bool {
        self.value_types.iter().any(|(v, _)| v == t)
    }

    pub fn roles_of(&self, t: &TypeId) -> Option<&[(TypeId, RoleId)]> {
        self.relationship_types.iter().find(|(n, _)| n == t).map(|(_, rs)| rs.as_slice())
    }

    fn check(&self) -> Result<(), SchemeError> {
        let mut seen = BTreeSet::new();
        for t in self.object_types.iter().chain(self.relationship_types.iter().map(|(t, _)| t)) {
            if !seen.insert(t) {
                return Err(SchemeError::DuplicateName(t.0.clone()));
            }
        }
        let mut roles = BTreeSet::new();
        for (_, rs) in &self.relationship_types {
            for (p, r) in rs {
                if !roles.insert(r) {
                    return Err(SchemeError::DuplicateName(r.0.clone()));
                }
                if !seen.contains(p) {
                    return Err(SchemeError::UnknownComponent(format!("player {p} of {r}")));
                }
            }
        }
        let mut ids = BTreeSet::new();
        for k in &self.constraints {
            if !ids.insert(k.id.as_str()) {
                return Err(SchemeError::DuplicateName(k.id.clone()));
            }
            if let Some(r) = k.roles().into_iter().find(|r| !roles.contains(r)) {
                return Err(SchemeError::UnknownComponent(format!("role {r} in constraint {}", k.id)));
            }
        }
        let domains = self.domain_names();
        for c in self.from.iter().chain(&self.to) {
            let t = TypeId::new(c.clone());
            if !(seen.contains(&t) || domains.contains(c) || ids.contains(c.as_str())) {
                return Err(SchemeError::UnknownComponent(c.clone()));
            }
        }
        for r in self.derivation_rules.iter().chain(&self.update_rules) {
            if !seen.contains(&r.defines) {
                return Err(SchemeError::UnknownComponent(format!("rule target {}", r.defines)));
            }
        }
        Ok(())
    }

    fn fragment(&self, items: &[String]) -> Fragment {
        let types = self.declared_types();
        let mut f = Fragment::default();
        for c in items {
            let t = TypeId::new(c.clone());
            if types.contains(&t) {
                f.types.insert(t);
            } else if let Some(k) = self.constraints.iter().find(|k| &k.id == c) {
                f.constraints.push(k.clone());
            } else {
                f.domains.insert(c.clone());
            }
        }
        f
    }

    pub fn from_of(&self) -> Fragment {
        self.fragment(&self.from)
    }

    /// The To components together with both rule sets.
    pub fn to_of(&self) -> Fragment {
        let mut f = self.fragment(&self.to);
        f.derivation_rules = self.derivation_rules.clone();
        f.update_rules = self.update_rules.clone();
        f
    }

    /// Every component, with the derivation rules.
    pub fn sch_of(&self) -> Fragment {
        Fragment {
            types: self.declared_types(),
            domains: self.domain_names(),
            constraints: self.constraints.clone(),
            derivation_rules: self.derivation_rules.clone(),
            update_rules: Vec::new(),
        }
    }

    /// `Sch` as a schema of its own. Value-type status, domains and
    /// subtyping come from `context` where it knows the type.
    pub fn sch_schema(&self, context: Option<&Schema>) -> Schema {
        let f = self.sch_of();
        let mut s = Schema { name: format!("Sch-{}", self.name), ..Schema::default() };
        for t in &f.types {
            if let Some(rs) = self.roles_of(t) {
                s.universe.relationship_types.insert(t.clone(), rs.iter().map(|(_, r)| r.clone()).collect());
                for (p, r) in rs {
                    s.universe.player.insert(r.clone(), p.clone());
                }
                continue;
            }
            s.universe.object_types.insert(t.clone());
            let ctx_value = context.is_some_and(|c| c.universe.is_value_type(t));
            if self.is_value_type(t) || ctx_value {
                s.universe.value_types.insert(t.clone());
                let d = self
                    .value_types
                    .iter()
                    .find(|(v, _)| v == t)
                    .and_then(|(_, d)| d.clone())
                    .or_else(|| context.and_then(|c| c.dom.get(t).cloned()));
                if let Some(d) = d {
                    let vals = context.and_then(|c| c.domains.get(&d).cloned()).flatten();
                    s.domains.insert(d.clone(), vals);
                    s.dom.insert(t.clone(), d);
                }
            }
        }
        if let Some(c) = context {
            for (a, b) in &c.universe.sub_of {
                if f.types.contains(a) && f.types.contains(b) {
                    s.universe.sub_of.insert((a.clone(), b.clone()));
                }
            }
        }
        s.constraints = f.constraints;
        s.derivation_rules = f.derivation_rules;
        s
    }
}

fn join<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for InstantiatedTransformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Transformation schema {};", self.name)?;
        f.write_str("  Object types:\n    ")?;
        join(f, &self.object_types, ", ")?;
        f.write_str(";\n")?;
        if !self.value_types.is_empty() {
            f.write_str("  Value types:\n    ")?;
            let vs: Vec<String> = self
                .value_types
                .iter()
                .map(|(v, d)| match d {
                    Some(d) => format!("{v}: {d}"),
                    None => v.to_string(),
                })
                .collect();
            join(f, &vs, ", ")?;
            f.write_str(";\n")?;
        }
        f.write_str("  Relationship types:\n")?;
        for (t, rs) in &self.relationship_types {
            let parts: Vec<String> = rs.iter().map(|(p, r)| format!("{p}:{r}")).collect();
            writeln!(f, "    {t} = [{}];", parts.join(", "))?;
        }
        if !self.constraints.is_empty() {
            f.write_str("  Constraints:\n")?;
            for k in &self.constraints {
                writeln!(f, "    {k};")?;
            }
        }
        f.write_str("  From:\n    ")?;
        join(f, &self.from, ", ")?;
        f.write_str(";\n  To:\n    ")?;
        join(f, &self.to, ", ")?;
        f.write_str(";\n")?;
        for (title, rules) in [("Derivation rules", &self.derivation_rules), ("Update rules", &self.update_rules)] {
            if rules.is_empty() {
                continue;
            }
            writeln!(f, "  {title}:")?;
            for r in rules {
                writeln!(f, "    {r};")?;
            }
        }
        f.write_str("End Transformation schema.\n")
    }
}
