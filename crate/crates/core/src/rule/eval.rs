use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use super::{Binding, Cond, RuleExpr, Term};
use super::relation::Relation;
use crate::error::EvalError;
use crate::name::{RoleId, TypeId};
use crate::value::Instance;

/// What the evaluator needs from its surroundings.
pub trait Env {
    /// Current extension of a relationship type, with its columns in
    /// declaration order.
    fn relation(&self, t: &TypeId) -> Result<Relation, EvalError>;
    fn is_value_type(&self, t: &TypeId) -> bool;
}

pub fn eval(e: &RuleExpr, env: &dyn Env) -> Result<Relation, EvalError> {
    match e {
        RuleExpr::Ref(t) => env.relation(t),
        RuleExpr::Proj(bs, inner) => {
            let input = eval(inner, env)?;
            project(bs, &input, env)
        }
        RuleExpr::Sel(cs, inner) => {
            let input = eval(inner, env)?;
            select(cs, &input)
        }
        RuleExpr::Join(a, b) => {
            let (l, r) = (eval(a, env)?, eval(b, env)?);
            if l.is_polymorphic_empty() || r.is_polymorphic_empty() {
                return Ok(Relation::default());
            }
            if let Some(c) = l.columns.iter().find(|c| r.columns.contains(c)) {
                return Err(EvalError::Columns(format!("JOIN operands share column `{c}`")));
            }
            let mut cols = l.columns.clone();
            cols.extend(r.columns.iter().cloned());
            let mut out = Relation::new(cols);
            for x in &l.tuples {
                for y in &r.tuples {
                    let mut t = x.clone();
                    t.extend(y.iter().cloned());
                    out.tuples.insert(t);
                }
            }
            Ok(out)
        }
        RuleExpr::Union(a, b) => eval(a, env)?.union(&eval(b, env)?),
        RuleExpr::Literal(ts) => literal(ts, env),
    }
}

fn unique_columns(cols: &[RoleId]) -> Result<(), EvalError> {
    let set: BTreeSet<&RoleId> = cols.iter().collect();
    if set.len() != cols.len() {
        return Err(EvalError::Columns(format!("repeated output column in {cols:?}")));
    }
    Ok(())
}

fn project(bs: &[Binding], input: &Relation, env: &dyn Env) -> Result<Relation, EvalError> {
    let cols: Vec<RoleId> = bs.iter().map(|b| b.out.clone()).collect();
    unique_columns(&cols)?;
    if input.is_polymorphic_empty() {
        return Ok(Relation::new(cols));
    }
    let mut out = Relation::new(cols);
    for t in &input.tuples {
        let row = bs.iter().map(|b| term(&b.term, input, t, env)).collect::<Result<Vec<_>, _>>()?;
        out.tuples.insert(row);
    }
    Ok(out)
}

fn select(cs: &[Cond], input: &Relation) -> Result<Relation, EvalError> {
    if input.is_polymorphic_empty() {
        return Ok(Relation::default());
    }
    let mut idx = Vec::with_capacity(cs.len());
    for c in cs {
        let l = input.index_of(&c.left).ok_or_else(|| EvalError::UnknownRole(c.left.clone()))?;
        let r = match &c.right {
            Term::Role(r) => Ok(input.index_of(r).ok_or_else(|| EvalError::UnknownRole(r.clone()))?),
            Term::Lit(v) => Err(Instance::Value(v.clone())),
            Term::Val(..) => return Err(EvalError::Type("Val is not allowed in a selection".into())),
        };
        idx.push((l, r));
    }
    let mut out = Relation::new(input.columns.clone());
    out.tuples = input
        .tuples
        .iter()
        .filter(|t| {
            idx.iter().all(|(l, r)| match r {
                Ok(j) => t[*l] == t[*j],
                Err(v) => t[*l] == *v,
            })
        })
        .cloned()
        .collect();
    Ok(out)
}

fn term(x: &Term, input: &Relation, row: &[Instance], env: &dyn Env) -> Result<Instance, EvalError> {
    match x {
        Term::Role(r) => {
            let i = input.index_of(r).ok_or_else(|| EvalError::UnknownRole(r.clone()))?;
            Ok(row[i].clone())
        }
        Term::Lit(v) => Ok(Instance::Value(v.clone())),
        Term::Val(t, arg) => val_of(t, term(arg, input, row, env)?, env),
    }
}

fn val_of(t: &TypeId, arg: Instance, env: &dyn Env) -> Result<Instance, EvalError> {
    if env.is_value_type(t) {
        return Err(EvalError::Type(format!("Val applied to value type `{t}`")));
    }
    match arg {
        Instance::Value(v) => Ok(Instance::Abstract { ty: t.clone(), tag: v }),
        Instance::Abstract { .. } => Err(EvalError::Type(format!("Val({t}, _) needs a literal argument"))),
    }
}

fn literal(ts: &[Vec<(RoleId, Term)>], env: &dyn Env) -> Result<Relation, EvalError> {
    let Some(first) = ts.first() else {
        return Ok(Relation::default());
    };
    let cols: Vec<RoleId> = first.iter().map(|(r, _)| r.clone()).collect();
    unique_columns(&cols)?;
    let mut out = Relation::new(cols.clone());
    let empty = Relation::default();
    for t in ts {
        if t.len() != cols.len() {
            return Err(EvalError::Columns("literal tuples use different roles".into()));
        }
        let mut row = Vec::with_capacity(cols.len());
        for c in &cols {
            let (_, x) = t
                .iter()
                .find(|(r, _)| r == c)
                .ok_or_else(|| EvalError::Columns(format!("literal tuple lacks role `{c}`")))?;
            if let Term::Role(r) = x {
                return Err(EvalError::Type(format!("role `{r}` used inside a literal")));
            }
            row.push(term(x, &empty, &[], env)?);
        }
        out.tuples.insert(row);
    }
    Ok(out)
}
