//! The schema file format.
//!
//! ```text
//! SCHEMA OlympicsB ;
//! DOMAINS nat = UNBOUNDED ; char = { 'G', 'S', 'B' } ;
//! OBJECT TYPES Country ;
//! VALUE TYPES Quantity : nat ;
//! RELATIONSHIP TYPES won-gold-in = [ Country : won-gold-in-1, Quantity : won-gold-in-2 ] ;
//! SUBTYPES A < B ;
//! INTERNAL won-gold-in ;
//! CONSTRAINTS u1 : UNIQUE { won-gold-in-1 } ;
//! DERIVATION RULES f = PROJ[...] g ;
//! UPDATE RULES g = ... ;
//! END
//! ```
//!
//! The parser checks names but not the axioms, so ill-formed schemas can be
//! loaded and reported on.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::{Constraint, ConstraintKind, Schema};
use crate::error::ParseError;
use crate::lex::{Cursor, Punct};
use crate::name::{RoleId, TypeId};
use crate::rule::parse_rule_at;
use crate::value::Value;

fn at_section(c: &Cursor) -> bool {
    c.is_kw("DOMAINS")
        || c.is_kw("SUBTYPES")
        || c.is_kw("INTERNAL")
        || c.is_kw("CONSTRAINTS")
        || c.is_kw("END")
        || (c.is_kw("OBJECT") && c.is_kw_at(1, "TYPES"))
        || (c.is_kw("VALUE") && c.is_kw_at(1, "TYPES"))
        || (c.is_kw("RELATIONSHIP") && c.is_kw_at(1, "TYPES"))
        || (c.is_kw("DERIVATION") && c.is_kw_at(1, "RULES"))
        || (c.is_kw("UPDATE") && c.is_kw_at(1, "RULES"))
}

fn names(c: &mut Cursor) -> Result<Vec<String>, ParseError> {
    let mut out = alloc::vec![c.ident()?];
    while c.eat_punct(Punct::Comma) {
        out.push(c.ident()?);
    }
    Ok(out)
}

/// `{ 'a', 'b' }` or a bare comma list of literals.
pub(crate) fn value_list(c: &mut Cursor) -> Result<Vec<Value>, ParseError> {
    let braced = c.eat_punct(Punct::LBrace);
    let mut out = Vec::new();
    if !(braced && c.is_punct(Punct::RBrace)) {
        loop {
            out.push(c.literal()?);
            if !c.eat_punct(Punct::Comma) {
                break;
            }
        }
    }
    if braced {
        c.expect_punct(Punct::RBrace)?;
    }
    Ok(out)
}

fn role_set(c: &mut Cursor) -> Result<Vec<RoleId>, ParseError> {
    c.expect_punct(Punct::LBrace)?;
    let mut out = Vec::new();
    loop {
        out.push(RoleId::new(c.ident()?));
        if !c.eat_punct(Punct::Comma) {
            break;
        }
    }
    c.expect_punct(Punct::RBrace)?;
    Ok(out)
}

fn role_pairs(c: &mut Cursor) -> Result<Vec<(RoleId, RoleId)>, ParseError> {
    let mut out = Vec::new();
    loop {
        c.expect_punct(Punct::LParen)?;
        let a = RoleId::new(c.ident()?);
        if !c.eat_punct(Punct::Arrow) {
            c.expect_punct(Punct::Eq)?;
        }
        let b = RoleId::new(c.ident()?);
        c.expect_punct(Punct::RParen)?;
        out.push((a, b));
        if !c.eat_punct(Punct::Comma) {
            break;
        }
    }
    Ok(out)
}

fn count(c: &mut Cursor) -> Result<u32, ParseError> {
    let n = c.int()?;
    u32::try_from(n).map_err(|_| c.error("count out of range"))
}

/// Parses `id : KIND ...` without the trailing `;`.
pub fn parse_constraint_at(c: &mut Cursor) -> Result<Constraint, ParseError> {
    let id = c.ident()?;
    c.expect_punct(Punct::Colon)?;
    let kind = if c.eat_kw("UNIQUE") {
        ConstraintKind::Unique(role_set(c)?)
    } else if c.eat_kw("MANDATORY") {
        ConstraintKind::Mandatory(role_set(c)?)
    } else if c.eat_kw("EXTUNIQUE") {
        ConstraintKind::ExternalUnique(role_set(c)?)
    } else if c.eat_kw("EACH") {
        let t = TypeId::new(c.ident()?);
        c.expect_kws(&["IS", "IN"])?;
        ConstraintKind::EachIsIn(t, value_list(c)?)
    } else if c.eat_kw("FREQUENCY") {
        let role = RoleId::new(c.ident()?);
        let min = count(c)?;
        c.expect_punct(Punct::DotDot)?;
        let max = count(c)?;
        ConstraintKind::Frequency { role, min, max }
    } else if c.eat_kw("EXCLUSION") {
        let mut sets = alloc::vec![role_set(c)?];
        loop {
            c.eat_punct(Punct::Comma);
            if !c.is_punct(Punct::LBrace) {
                break;
            }
            sets.push(role_set(c)?);
        }
        ConstraintKind::Exclusion(sets)
    } else if c.eat_kw("SUBSET") {
        ConstraintKind::Subset(role_pairs(c)?)
    } else if c.eat_kw("EQUALITY") {
        ConstraintKind::Equality(role_pairs(c)?)
    } else if c.eat_kw("CARDINALITY") {
        let t = TypeId::new(c.ident()?);
        c.expect_punct(Punct::Eq)?;
        ConstraintKind::Cardinality(t, count(c)?)
    } else {
        return Err(c.error("expected constraint kind"));
    };
    Ok(Constraint { id, kind })
}

pub fn parse_schema(src: &str) -> Result<Schema, ParseError> {
    let mut c = Cursor::from_str(src)?;
    c.expect_kw("SCHEMA")?;
    let mut s = Schema { name: c.ident()?, ..Schema::default() };
    c.expect_punct(Punct::Semi)?;
    let mut declared: BTreeSet<String> = BTreeSet::new();
    let mut declare = |name: &str| {
        if declared.insert(name.to_string()) {
            Ok(())
        } else {
            Err(ParseError::DuplicateName(name.to_string()))
        }
    };
    let mut internal_names = Vec::new();
    loop {
        if c.eat_kw("END") {
            break;
        } else if c.eat_kw("DOMAINS") {
            while !at_section(&c) {
                let name = c.ident()?;
                c.expect_punct(Punct::Eq)?;
                let values = if c.eat_kw("UNBOUNDED") { None } else { Some(value_list(&mut c)?.into_iter().collect()) };
                if s.domains.insert(name.clone(), values).is_some() {
                    return Err(ParseError::DuplicateName(name));
                }
                c.expect_punct(Punct::Semi)?;
            }
        } else if c.eat_kws(&["OBJECT", "TYPES"]) {
            while !at_section(&c) {
                for n in names(&mut c)? {
                    declare(&n)?;
                    s.universe.object_types.insert(TypeId::new(n));
                }
                c.expect_punct(Punct::Semi)?;
            }
        } else if c.eat_kws(&["VALUE", "TYPES"]) {
            while !at_section(&c) {
                loop {
                    let n = c.ident()?;
                    declare(&n)?;
                    let t = TypeId::new(n);
                    if c.eat_punct(Punct::Colon) {
                        s.dom.insert(t.clone(), c.ident()?);
                    }
                    s.universe.object_types.insert(t.clone());
                    s.universe.value_types.insert(t);
                    if !c.eat_punct(Punct::Comma) {
                        break;
                    }
                }
                c.expect_punct(Punct::Semi)?;
            }
        } else if c.eat_kws(&["RELATIONSHIP", "TYPES"]) {
            while !at_section(&c) {
                let n = c.ident()?;
                declare(&n)?;
                c.expect_punct(Punct::Eq)?;
                c.expect_punct(Punct::LBracket)?;
                let mut roles = Vec::new();
                loop {
                    let p = TypeId::new(c.ident()?);
                    c.expect_punct(Punct::Colon)?;
                    let r = c.ident()?;
                    declare(&r)?;
                    let r = RoleId::new(r);
                    s.universe.player.insert(r.clone(), p);
                    roles.push(r);
                    if !c.eat_punct(Punct::Comma) {
                        break;
                    }
                }
                c.expect_punct(Punct::RBracket)?;
                c.expect_punct(Punct::Semi)?;
                s.universe.relationship_types.insert(TypeId::new(n), roles);
            }
        } else if c.eat_kw("SUBTYPES") {
            while !at_section(&c) {
                let a = TypeId::new(c.ident()?);
                c.expect_punct(Punct::Lt)?;
                let b = TypeId::new(c.ident()?);
                c.expect_punct(Punct::Semi)?;
                s.universe.sub_of.insert((a, b));
            }
        } else if c.eat_kw("INTERNAL") {
            while !at_section(&c) {
                internal_names.extend(names(&mut c)?);
                c.expect_punct(Punct::Semi)?;
            }
        } else if c.eat_kw("CONSTRAINTS") {
            while !at_section(&c) {
                let k = parse_constraint_at(&mut c)?;
                if s.constraints.iter().any(|x| x.id == k.id) {
                    return Err(ParseError::DuplicateName(k.id));
                }
                s.constraints.push(k);
                c.expect_punct(Punct::Semi)?;
            }
        } else if c.eat_kws(&["DERIVATION", "RULES"]) {
            while !at_section(&c) {
                s.derivation_rules.push(parse_rule_at(&mut c)?);
                c.expect_punct(Punct::Semi)?;
            }
        } else if c.eat_kws(&["UPDATE", "RULES"]) {
            while !at_section(&c) {
                s.update_rules.push(parse_rule_at(&mut c)?);
                c.expect_punct(Punct::Semi)?;
            }
        } else {
            return Err(c.error("expected a section keyword or END"));
        }
    }
    c.expect_end()?;

    for d in s.dom.values() {
        if !s.domains.contains_key(d) {
            return Err(ParseError::Undeclared { what: "domain", name: d.clone() });
        }
    }
    let types = s.types();
    for n in internal_names {
        let t = TypeId::new(n);
        if !types.contains(&t) {
            return Err(ParseError::Undeclared { what: "type", name: t.0 });
        }
        s.internal.insert(t);
    }
    for k in &s.constraints {
        for r in k.roles() {
            if !s.universe.player.contains_key(&r) {
                return Err(ParseError::Undeclared { what: "role", name: r.0 });
            }
        }
        if let ConstraintKind::EachIsIn(t, _) | ConstraintKind::Cardinality(t, _) = &k.kind {
            if !s.universe.object_types.contains(t) {
                return Err(ParseError::Undeclared { what: "object type", name: t.0.clone() });
            }
        }
    }
    Ok(s)
}

fn join<T: core::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for (i, x) in items.into_iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{x}");
    }
    out
}

pub fn serialize_schema(s: &Schema) -> String {
    let u = &s.universe;
    let mut out = format!("SCHEMA {} ;\n", s.name);
    if !s.domains.is_empty() {
        out.push_str("DOMAINS\n");
        for (name, vals) in &s.domains {
            match vals {
                None => {
                    let _ = writeln!(out, "  {name} = UNBOUNDED ;");
                }
                Some(vs) => {
                    let _ = writeln!(out, "  {name} = {{ {} }} ;", join(vs));
                }
            }
        }
    }
    let entities: Vec<_> = u.object_types.iter().filter(|t| !u.is_value_type(t)).collect();
    if !entities.is_empty() {
        let _ = writeln!(out, "OBJECT TYPES\n  {} ;", join(entities));
    }
    if !u.value_types.is_empty() {
        out.push_str("VALUE TYPES\n");
        for v in &u.value_types {
            match s.dom.get(v) {
                Some(d) => {
                    let _ = writeln!(out, "  {v} : {d} ;");
                }
                None => {
                    let _ = writeln!(out, "  {v} ;");
                }
            }
        }
    }
    if !u.relationship_types.is_empty() {
        out.push_str("RELATIONSHIP TYPES\n");
        for (t, roles) in &u.relationship_types {
            let parts = roles.iter().map(|r| match u.player.get(r) {
                Some(p) => format!("{p} : {r}"),
                None => format!("? : {r}"),
            });
            let _ = writeln!(out, "  {t} = [ {} ] ;", join(parts));
        }
    }
    if !u.sub_of.is_empty() {
        out.push_str("SUBTYPES\n");
        for (a, b) in &u.sub_of {
            let _ = writeln!(out, "  {a} < {b} ;");
        }
    }
    if !s.internal.is_empty() {
        let _ = writeln!(out, "INTERNAL\n  {} ;", join(&s.internal));
    }
    if !s.constraints.is_empty() {
        out.push_str("CONSTRAINTS\n");
        for k in &s.constraints {
            let _ = writeln!(out, "  {k} ;");
        }
    }
    if !s.derivation_rules.is_empty() {
        out.push_str("DERIVATION RULES\n");
        for r in &s.derivation_rules {
            let _ = writeln!(out, "  {r} ;");
        }
    }
    if !s.update_rules.is_empty() {
        out.push_str("UPDATE RULES\n");
        for r in &s.update_rules {
            let _ = writeln!(out, "  {r} ;");
        }
    }
    out.push_str("END\n");
    out
}
