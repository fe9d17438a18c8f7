use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{Binding, Cond, Rule, RuleExpr, Term};
use crate::error::ParseError;
use crate::lex::{Cursor, Punct, Tok};
use crate::name::{RoleId, TypeId};

const RESERVED: [&str; 4] = ["PROJ", "SEL", "JOIN", "UNION"];

pub fn parse_expr(src: &str) -> Result<RuleExpr, ParseError> {
    let mut c = Cursor::from_str(src)?;
    let e = parse_expr_at(&mut c)?;
    c.expect_end()?;
    Ok(e)
}

pub fn parse_rule(src: &str) -> Result<Rule, ParseError> {
    let mut c = Cursor::from_str(src)?;
    let r = parse_rule_at(&mut c)?;
    c.eat_punct(Punct::Semi);
    c.expect_end()?;
    Ok(r)
}

/// Parses `rule ; rule ; ...` up to the end of input.
pub fn parse_rule_list(src: &str) -> Result<Vec<Rule>, ParseError> {
    let mut c = Cursor::from_str(src)?;
    let mut out = Vec::new();
    while !c.at_end() {
        out.push(parse_rule_at(&mut c)?);
        if !c.eat_punct(Punct::Semi) {
            break;
        }
    }
    c.expect_end()?;
    Ok(out)
}

pub fn parse_rule_at(c: &mut Cursor) -> Result<Rule, ParseError> {
    let defines = TypeId::new(c.ident()?);
    c.expect_punct(Punct::Eq)?;
    let body = parse_expr_at(c)?;
    Ok(Rule { defines, body })
}

pub fn parse_expr_at(c: &mut Cursor) -> Result<RuleExpr, ParseError> {
    let mut e = prefix(c)?;
    while c.eat_kw("UNION") {
        let rhs = prefix(c)?;
        e = RuleExpr::Union(Box::new(e), Box::new(rhs));
    }
    Ok(e)
}

fn prefix(c: &mut Cursor) -> Result<RuleExpr, ParseError> {
    if c.eat_kw("PROJ") {
        c.expect_punct(Punct::LBracket)?;
        let mut bs = Vec::new();
        if !c.is_punct(Punct::RBracket) {
            loop {
                let out = RoleId::new(c.ident()?);
                c.expect_punct(Punct::Eq)?;
                bs.push(Binding { out, term: term(c)? });
                if !c.eat_punct(Punct::Comma) {
                    break;
                }
            }
        }
        c.expect_punct(Punct::RBracket)?;
        return Ok(RuleExpr::Proj(bs, Box::new(prefix(c)?)));
    }
    if c.eat_kw("SEL") {
        c.expect_punct(Punct::LBracket)?;
        let mut cs = Vec::new();
        loop {
            let left = RoleId::new(c.ident()?);
            c.expect_punct(Punct::Eq)?;
            let right = if c.is_literal() { Term::Lit(c.literal()?) } else { Term::Role(RoleId::new(c.ident()?)) };
            cs.push(Cond { left, right });
            if !c.eat_punct(Punct::Comma) {
                break;
            }
        }
        c.expect_punct(Punct::RBracket)?;
        return Ok(RuleExpr::Sel(cs, Box::new(prefix(c)?)));
    }
    let mut e = atom(c)?;
    while c.eat_kw("JOIN") {
        let rhs = atom(c)?;
        e = RuleExpr::Join(Box::new(e), Box::new(rhs));
    }
    Ok(e)
}

fn atom(c: &mut Cursor) -> Result<RuleExpr, ParseError> {
    if c.eat_punct(Punct::LParen) {
        let e = parse_expr_at(c)?;
        c.expect_punct(Punct::RParen)?;
        return Ok(e);
    }
    if c.eat_punct(Punct::LBrace) {
        let mut tuples = Vec::new();
        if !c.is_punct(Punct::RBrace) {
            loop {
                c.expect_punct(Punct::Lt)?;
                let mut tuple = Vec::new();
                loop {
                    let r = RoleId::new(c.ident()?);
                    c.expect_punct(Punct::Eq)?;
                    tuple.push((r, term(c)?));
                    if !c.eat_punct(Punct::Comma) {
                        break;
                    }
                }
                c.expect_punct(Punct::Gt)?;
                tuples.push(tuple);
                if !c.eat_punct(Punct::Comma) {
                    break;
                }
            }
        }
        c.expect_punct(Punct::RBrace)?;
        return Ok(RuleExpr::Literal(tuples));
    }
    match c.peek() {
        Some(Tok::Ident(s)) if !RESERVED.iter().any(|k| s.eq_ignore_ascii_case(k)) => {
            Ok(RuleExpr::Ref(TypeId::new(c.ident()?)))
        }
        _ => Err(c.error("expected relationship type, `(` or `{`")),
    }
}

fn term(c: &mut Cursor) -> Result<Term, ParseError> {
    if c.is_literal() {
        return Ok(Term::Lit(c.literal()?));
    }
    if matches!(c.peek(), Some(Tok::Ident(s)) if s == "Val") && c.peek_at(1) == Some(&Tok::Punct(Punct::LParen)) {
        c.bump();
        c.bump();
        let t = TypeId::new(c.ident()?);
        c.expect_punct(Punct::Comma)?;
        let inner = term(c)?;
        c.expect_punct(Punct::RParen)?;
        return Ok(Term::Val(t, Box::new(inner)));
    }
    Ok(Term::Role(RoleId::new(c.ident()?)))
}
