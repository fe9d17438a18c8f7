//! Parameter lists: `OTEmission([Country, Quantity], [[a-1, a-2], ...], ..., ['G', 'S'])`.
//!
//! A matrix parameter `(r!n)!m` is given either as `m` lists of `n`
//! elements or as one flat list of `n*m` elements ordered
//! `r_{1,1}..r_{n,1}, ..., r_{1,m}..r_{n,m}`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{Param, SchemeError, Shape};
use crate::lex::{Cursor, Punct, Tok};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParValue {
    Atom(Tok),
    List(Vec<ParValue>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParList {
    pub scheme: Option<String>,
    pub items: Vec<ParValue>,
}

fn value(c: &mut Cursor) -> Result<ParValue, SchemeError> {
    if c.eat_punct(Punct::LBracket) {
        let mut items = Vec::new();
        if !c.is_punct(Punct::RBracket) {
            loop {
                items.push(value(c)?);
                if !c.eat_punct(Punct::Comma) {
                    break;
                }
            }
        }
        c.expect_punct(Punct::RBracket)?;
        return Ok(ParValue::List(items));
    }
    match c.bump() {
        Some(t @ (Tok::Ident(_) | Tok::Str(_) | Tok::Int(_))) => Ok(ParValue::Atom(t)),
        _ => {
            c.set_pos(c.pos().saturating_sub(1));
            Err(c.error("expected a parameter").into())
        }
    }
}

pub fn parse_parlist(src: &str) -> Result<ParList, SchemeError> {
    let mut c = Cursor::from_str(src)?;
    let scheme = match (c.peek(), c.peek_at(1)) {
        (Some(Tok::Ident(s)), Some(Tok::Punct(Punct::LParen))) => {
            let s = s.clone();
            c.bump();
            Some(s)
        }
        _ => None,
    };
    let paren = c.eat_punct(Punct::LParen);
    let mut items = Vec::new();
    if !(c.at_end() || c.is_punct(Punct::RParen)) {
        loop {
            items.push(value(&mut c)?);
            if !c.eat_punct(Punct::Comma) {
                break;
            }
        }
    }
    if paren {
        c.expect_punct(Punct::RParen)?;
    }
    c.eat_punct(Punct::Semi);
    c.expect_end()?;
    Ok(ParList { scheme, items })
}

impl fmt::Display for ParValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParValue::Atom(t) => write!(f, "{t}"),
            ParValue::List(xs) => {
                f.write_str("[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
        }
    }
}

impl fmt::Display for ParList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(s) = &self.scheme {
            f.write_str(s)?;
        }
        f.write_str("(")?;
        for (i, x) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    Scalar(Tok),
    Vector(Vec<Tok>),
    /// Indexed `[outer][inner]`.
    Matrix(Vec<Vec<Tok>>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env {
    pub arity: BTreeMap<String, usize>,
    pub values: BTreeMap<String, Bound>,
}

fn set_arity(env: &mut Env, var: &str, k: usize, who: &str) -> Result<(), SchemeError> {
    match env.arity.get(var) {
        Some(&old) if old != k => Err(SchemeError::ArityMismatch(format!(
            "{who} fixes {var} = {k} but it was already {old}"
        ))),
        _ => {
            env.arity.insert(var.into(), k);
            Ok(())
        }
    }
}

fn atoms(xs: &[ParValue], who: &str) -> Result<Vec<Tok>, SchemeError> {
    xs.iter()
        .map(|x| match x {
            ParValue::Atom(t) => Ok(t.clone()),
            ParValue::List(_) => Err(SchemeError::ArityMismatch(format!("{who} is nested too deeply"))),
        })
        .collect()
}

/// Binds the parameter list to the scheme's parameters and fixes the arity
/// variables.
pub(crate) fn bind(params: &[Param], list: &ParList) -> Result<Env, SchemeError> {
    if list.items.len() < params.len() {
        let missing: Vec<&str> = params[list.items.len()..].iter().map(|p| p.name.as_str()).collect();
        return Err(SchemeError::Partial(format!("no values for {}", missing.join(", "))));
    }
    if list.items.len() > params.len() {
        return Err(SchemeError::ArityMismatch(format!(
            "{} parameters given, the scheme takes {}",
            list.items.len(),
            params.len()
        )));
    }
    let mut names = BTreeSet::new();
    fn unique(v: &ParValue, names: &mut BTreeSet<String>) -> Result<(), SchemeError> {
        match v {
            ParValue::Atom(Tok::Ident(s)) => {
                if !names.insert(s.clone()) {
                    return Err(SchemeError::DuplicateName(s.clone()));
                }
                Ok(())
            }
            ParValue::Atom(_) => Ok(()),
            ParValue::List(xs) => xs.iter().try_for_each(|x| unique(x, names)),
        }
    }
    for v in &list.items {
        unique(v, &mut names)?;
    }

    let mut env = Env::default();
    let mut deferred = Vec::new();
    for (p, v) in params.iter().zip(&list.items) {
        let who = p.name.as_str();
        match (&p.shape, v) {
            (Shape::Scalar, ParValue::Atom(t)) => {
                env.values.insert(p.name.clone(), Bound::Scalar(t.clone()));
            }
            (Shape::Vector(var), ParValue::List(xs)) => {
                let xs = atoms(xs, who)?;
                set_arity(&mut env, var, xs.len(), who)?;
                env.values.insert(p.name.clone(), Bound::Vector(xs));
            }
            (Shape::Matrix { inner, outer }, ParValue::List(xs)) => {
                if !xs.is_empty() && xs.iter().all(|x| matches!(x, ParValue::List(_))) {
                    set_arity(&mut env, outer, xs.len(), who)?;
                    let mut rows = Vec::new();
                    for x in xs {
                        let ParValue::List(row) = x else { unreachable!() };
                        let row = atoms(row, who)?;
                        set_arity(&mut env, inner, row.len(), who)?;
                        rows.push(row);
                    }
                    env.values.insert(p.name.clone(), Bound::Matrix(rows));
                } else {
                    deferred.push((p, atoms(xs, who)?));
                }
            }
            (Shape::Scalar, ParValue::List(_)) => {
                return Err(SchemeError::ArityMismatch(format!("{who} is a single parameter but got a list")))
            }
            (_, ParValue::Atom(_)) => {
                return Err(SchemeError::ArityMismatch(format!("{who} takes a list")))
            }
        }
    }
    for (p, flat) in deferred {
        let Shape::Matrix { inner, outer } = &p.shape else { unreachable!() };
        let who = p.name.as_str();
        let (n, m) = match (env.arity.get(inner).copied(), env.arity.get(outer).copied()) {
            (Some(n), _) if n > 0 && flat.len() % n == 0 => (n, flat.len() / n),
            (None, Some(m)) if m > 0 && flat.len() % m == 0 => (flat.len() / m, m),
            (Some(0), _) | (None, Some(0)) if flat.is_empty() => (0, 0),
            (None, None) => {
                return Err(SchemeError::ArityMismatch(format!("flat list for {who} needs {inner} or {outer} fixed elsewhere")))
            }
            _ => return Err(SchemeError::ArityMismatch(format!("{} elements do not fit {who}", flat.len()))),
        };
        set_arity(&mut env, inner, n, who)?;
        set_arity(&mut env, outer, m, who)?;
        let rows = flat.chunks(n.max(1)).map(<[Tok]>::to_vec).collect();
        env.values.insert(p.name.clone(), Bound::Matrix(rows));
    }
    Ok(env)
}
