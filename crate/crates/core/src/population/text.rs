//! The population file format.
//!
//! ```text
//! POPULATION p ;
//! Patient = { Val(Patient,'#0') } ;
//! has-name = { <has-name-1 = Val(Patient,'#0'), has-name-2 = 'a'> } ;
//! END
//! ```
//!
//! Whether `{}` is an empty set of instances or of tuples is read off the
//! schema.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{Extent, Population};
use crate::error::ParseError;
use crate::lex::{Cursor, Punct, Tok};
use crate::name::{RoleId, TypeId};
use crate::rule::Relation;
use crate::schema::Schema;
use crate::value::Instance;

fn instance(c: &mut Cursor) -> Result<Instance, ParseError> {
    if matches!(c.peek(), Some(Tok::Ident(s)) if s == "Val") {
        c.bump();
        c.expect_punct(Punct::LParen)?;
        let ty = TypeId::new(c.ident()?);
        c.expect_punct(Punct::Comma)?;
        let tag = c.literal()?;
        c.expect_punct(Punct::RParen)?;
        return Ok(Instance::Abstract { ty, tag });
    }
    Ok(Instance::Value(c.literal()?))
}

pub fn parse_population(src: &str, schema: &Schema) -> Result<Population, ParseError> {
    let u = &schema.universe;
    let mut c = Cursor::from_str(src)?;
    c.expect_kw("POPULATION")?;
    if !c.is_punct(Punct::Semi) {
        c.ident()?;
    }
    c.expect_punct(Punct::Semi)?;
    let mut pop = Population::new();
    while !c.eat_kw("END") {
        let t = TypeId::new(c.ident()?);
        c.expect_punct(Punct::Eq)?;
        c.expect_punct(Punct::LBrace)?;
        let extent = if let Some(roles) = u.roles_of(&t) {
            let mut rel = Relation::new(roles.to_vec());
            while !c.is_punct(Punct::RBrace) {
                c.expect_punct(Punct::Lt)?;
                let mut row: Vec<Option<Instance>> = alloc::vec![None; roles.len()];
                loop {
                    let r = RoleId::new(c.ident()?);
                    let i = roles
                        .iter()
                        .position(|x| *x == r)
                        .ok_or_else(|| ParseError::Undeclared { what: "role", name: r.0.clone() })?;
                    c.expect_punct(Punct::Eq)?;
                    row[i] = Some(instance(&mut c)?);
                    if !c.eat_punct(Punct::Comma) {
                        break;
                    }
                }
                c.expect_punct(Punct::Gt)?;
                let row: Option<Vec<Instance>> = row.into_iter().collect();
                rel.tuples.insert(row.ok_or_else(|| c.error(format!("tuple of {t} lacks a role")))?);
                if !c.eat_punct(Punct::Comma) {
                    break;
                }
            }
            Extent::Tuples(rel)
        } else if u.object_types.contains(&t) {
            let mut xs = BTreeSet::new();
            while !c.is_punct(Punct::RBrace) {
                xs.insert(instance(&mut c)?);
                if !c.eat_punct(Punct::Comma) {
                    break;
                }
            }
            Extent::Objects(xs)
        } else {
            return Err(ParseError::Undeclared { what: "type", name: t.0 });
        };
        c.expect_punct(Punct::RBrace)?;
        c.expect_punct(Punct::Semi)?;
        if pop.extents.insert(t.clone(), extent).is_some() {
            return Err(ParseError::DuplicateName(t.0));
        }
    }
    c.expect_end()?;
    Ok(pop)
}

pub fn serialize_population(name: &str, pop: &Population) -> String {
    let mut out = format!("POPULATION {name} ;\n");
    for (t, e) in &pop.extents {
        let items: Vec<String> = match e {
            Extent::Objects(xs) => xs.iter().map(|x| format!("{x}")).collect(),
            Extent::Tuples(r) => r.tuples.iter().map(|tup| super::tuple_text(&r.columns, tup)).collect(),
        };
        let _ = writeln!(out, "{t} = {{ {} }} ;", items.join(", "));
    }
    out.push_str("END\n");
    out
}
