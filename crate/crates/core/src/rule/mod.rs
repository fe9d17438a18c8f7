//! The rule language used for derivation and update rules.
//!
//! ```text
//! expr  := prefix ("UNION" prefix)*
//! prefix:= "PROJ" "[" binding,* "]" prefix | "SEL" "[" cond,* "]" prefix | join
//! join  := atom ("JOIN" atom)*
//! atom  := "(" expr ")" | "{" tuple,* "}" | relationship-type
//! ```
//!
//! `JOIN` is the Cartesian product and binds tighter than the prefix
//! operators, which bind tighter than `UNION`. Results are sets.

mod eval;
mod parse;
mod relation;

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::error::EvalError;
use crate::name::{RoleId, TypeId};
use crate::value::Value;

pub use eval::{eval, Env};
pub use parse::{parse_expr, parse_rule, parse_rule_list, parse_rule_at, parse_expr_at};
pub use relation::Relation;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Role(RoleId),
    Lit(Value),
    /// `Val(t, x)`: the instance of `t` identified by the literal `x`.
    Val(TypeId, Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Binding {
    pub out: RoleId,
    pub term: Term,
}

/// `left = right`, where `right` is a role or a literal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cond {
    pub left: RoleId,
    pub right: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleExpr {
    Ref(TypeId),
    Proj(Vec<Binding>, Box<RuleExpr>),
    Sel(Vec<Cond>, Box<RuleExpr>),
    Join(Box<RuleExpr>, Box<RuleExpr>),
    Union(Box<RuleExpr>, Box<RuleExpr>),
    Literal(Vec<Vec<(RoleId, Term)>>),
}

/// `defines = body`. Whether it is a derivation or an update rule depends on
/// the list it sits in.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub defines: TypeId,
    pub body: RuleExpr,
}

impl Term {
    fn collect_types(&self, out: &mut BTreeSet<TypeId>) {
        if let Term::Val(t, inner) = self {
            out.insert(t.clone());
            inner.collect_types(out);
        }
    }

    fn has_role(&self) -> bool {
        match self {
            Term::Role(_) => true,
            Term::Lit(_) => false,
            Term::Val(_, inner) => inner.has_role(),
        }
    }
}

impl RuleExpr {
    pub fn union(a: RuleExpr, b: RuleExpr) -> RuleExpr {
        RuleExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn join(a: RuleExpr, b: RuleExpr) -> RuleExpr {
        RuleExpr::Join(Box::new(a), Box::new(b))
    }

    /// Types the expression reads: relationship references and the object
    /// types named in `Val` calls.
    pub fn depends(&self) -> BTreeSet<TypeId> {
        let mut out = BTreeSet::new();
        self.collect(&mut out, true);
        out
    }

    /// Relationship types referenced, ignoring `Val` calls.
    pub fn references(&self) -> BTreeSet<TypeId> {
        let mut out = BTreeSet::new();
        self.collect(&mut out, false);
        out
    }

    fn collect(&self, out: &mut BTreeSet<TypeId>, with_val: bool) {
        match self {
            RuleExpr::Ref(t) => {
                out.insert(t.clone());
            }
            RuleExpr::Proj(bs, e) => {
                if with_val {
                    bs.iter().for_each(|b| b.term.collect_types(out));
                }
                e.collect(out, with_val);
            }
            RuleExpr::Sel(cs, e) => {
                if with_val {
                    cs.iter().for_each(|c| c.right.collect_types(out));
                }
                e.collect(out, with_val);
            }
            RuleExpr::Join(a, b) | RuleExpr::Union(a, b) => {
                a.collect(out, with_val);
                b.collect(out, with_val);
            }
            RuleExpr::Literal(ts) => {
                if with_val {
                    ts.iter().flatten().for_each(|(_, t)| t.collect_types(out));
                }
            }
        }
    }

    /// Literals appearing as arguments of `Val(ty, _)`.
    pub fn val_literals(&self, ty: &TypeId, out: &mut BTreeSet<Value>) {
        fn term(t: &Term, ty: &TypeId, out: &mut BTreeSet<Value>) {
            if let Term::Val(u, inner) = t {
                if u == ty {
                    if let Term::Lit(v) = inner.as_ref() {
                        out.insert(v.clone());
                    }
                }
                term(inner, ty, out);
            }
        }
        match self {
            RuleExpr::Ref(_) => {}
            RuleExpr::Proj(bs, e) => {
                bs.iter().for_each(|b| term(&b.term, ty, out));
                e.val_literals(ty, out);
            }
            RuleExpr::Sel(cs, e) => {
                cs.iter().for_each(|c| term(&c.right, ty, out));
                e.val_literals(ty, out);
            }
            RuleExpr::Join(a, b) | RuleExpr::Union(a, b) => {
                a.val_literals(ty, out);
                b.val_literals(ty, out);
            }
            RuleExpr::Literal(ts) => ts.iter().flatten().for_each(|(_, t)| term(t, ty, out)),
        }
    }

    /// True when the body reads some relationship type, as opposed to a
    /// body that is a constant literal.
    pub fn reads_relations(&self) -> bool {
        !self.references().is_empty()
    }

    /// True when the expression is a literal with no role references.
    pub fn is_constant(&self) -> bool {
        match self {
            RuleExpr::Literal(ts) => ts.iter().flatten().all(|(_, t)| !t.has_role()),
            _ => false,
        }
    }

    /// Replaces every reference to a key of `by` with the mapped expression.
    pub fn replace_refs(&self, by: &BTreeMap<TypeId, RuleExpr>) -> RuleExpr {
        match self {
            RuleExpr::Ref(t) => match by.get(t) {
                Some(e) => e.clone(),
                None => self.clone(),
            },
            RuleExpr::Proj(bs, e) => RuleExpr::Proj(bs.clone(), Box::new(e.replace_refs(by))),
            RuleExpr::Sel(cs, e) => RuleExpr::Sel(cs.clone(), Box::new(e.replace_refs(by))),
            RuleExpr::Join(a, b) => RuleExpr::join(a.replace_refs(by), b.replace_refs(by)),
            RuleExpr::Union(a, b) => RuleExpr::union(a.replace_refs(by), b.replace_refs(by)),
            RuleExpr::Literal(_) => self.clone(),
        }
    }
}

impl Rule {
    pub fn new(defines: impl Into<TypeId>, body: RuleExpr) -> Self {
        Self { defines: defines.into(), body }
    }

    pub fn depends(&self) -> BTreeSet<TypeId> {
        self.body.depends()
    }
}

/// Unfolds the rules in `removed` inside `rules` (written `X|^RD`).
///
/// References to a removed type are replaced by its body, repeatedly, so
/// removed rules may refer to each other as long as they do not form a cycle.
pub fn substitute(rules: &[Rule], removed: &[Rule]) -> Result<Vec<Rule>, EvalError> {
    let table: BTreeMap<TypeId, &RuleExpr> = removed.iter().map(|r| (r.defines.clone(), &r.body)).collect();
    let mut resolved: BTreeMap<TypeId, RuleExpr> = BTreeMap::new();
    for t in table.keys() {
        resolve(t, &table, &mut resolved, &mut Vec::new())?;
    }
    Ok(rules
        .iter()
        .map(|r| Rule { defines: r.defines.clone(), body: r.body.replace_refs(&resolved) })
        .collect())
}

fn resolve(
    t: &TypeId,
    table: &BTreeMap<TypeId, &RuleExpr>,
    done: &mut BTreeMap<TypeId, RuleExpr>,
    stack: &mut Vec<TypeId>,
) -> Result<(), EvalError> {
    if done.contains_key(t) {
        return Ok(());
    }
    if let Some(i) = stack.iter().position(|s| s == t) {
        let mut cycle = stack[i..].to_vec();
        cycle.push(t.clone());
        return Err(EvalError::Cycle(cycle));
    }
    stack.push(t.clone());
    let body = table[t];
    for d in body.references() {
        if table.contains_key(&d) {
            resolve(&d, table, done, stack)?;
        }
    }
    stack.pop();
    let unfolded = body.replace_refs(done);
    done.insert(t.clone(), unfolded);
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Role(r) => write!(f, "{r}"),
            Term::Lit(v) => write!(f, "{v}"),
            Term::Val(t, x) => write!(f, "Val({t},{x})"),
        }
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.out, self.term)
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.left, self.right)
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

// Precedence levels: 0 union, 1 prefix, 2 join, 3 atom.
fn level(e: &RuleExpr) -> u8 {
    match e {
        RuleExpr::Union(..) => 0,
        RuleExpr::Proj(..) | RuleExpr::Sel(..) => 1,
        RuleExpr::Join(..) => 2,
        RuleExpr::Ref(_) | RuleExpr::Literal(_) => 3,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &RuleExpr, min: u8) -> fmt::Result {
    if level(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for RuleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleExpr::Ref(t) => write!(f, "{t}"),
            RuleExpr::Proj(bs, e) => {
                f.write_str("PROJ[")?;
                write_list(f, bs)?;
                f.write_str("] ")?;
                write_at(f, e, 1)
            }
            RuleExpr::Sel(cs, e) => {
                f.write_str("SEL[")?;
                write_list(f, cs)?;
                f.write_str("] ")?;
                write_at(f, e, 1)
            }
            RuleExpr::Join(a, b) => {
                write_at(f, a, 2)?;
                f.write_str(" JOIN ")?;
                write_at(f, b, 3)
            }
            RuleExpr::Union(a, b) => {
                write_at(f, a, 0)?;
                f.write_str(" UNION ")?;
                write_at(f, b, 1)
            }
            RuleExpr::Literal(ts) => {
                f.write_str("{")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str("<")?;
                    for (j, (r, x)) in t.iter().enumerate() {
                        if j > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{r}={x}")?;
                    }
                    f.write_str(">")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.defines, self.body)
    }
}
