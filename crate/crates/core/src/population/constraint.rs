use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{check::Ctx, Population};
use crate::error::EvalError;
use crate::name::{RoleId, TypeId};
use crate::rule::Relation;
use crate::schema::{Constraint, ConstraintKind};
use crate::value::Instance;

fn show(xs: &[Instance]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x}")).collect();
    format!("({})", parts.join(", "))
}

/// The relationship type holding all of `roles`, with their column indexes.
fn owner<'p>(ctx: &Ctx<'_>, pop: &'p Population, roles: &[RoleId]) -> Result<(&'p Relation, Vec<usize>), EvalError> {
    let u = &ctx.schema.universe;
    let first = roles.first().ok_or_else(|| EvalError::Unsupported("empty role set".into()))?;
    let rel = u.rel_of(first).ok_or_else(|| EvalError::UnknownRole(first.clone()))?;
    let r = ctx.relation(pop, rel)?;
    let idx = roles
        .iter()
        .map(|x| {
            r.index_of(x)
                .ok_or_else(|| EvalError::Unsupported(format!("roles {roles:?} span several relationship types")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((r, idx))
}

fn project(r: &Relation, idx: &[usize]) -> BTreeSet<Vec<Instance>> {
    r.tuples.iter().map(|t| idx.iter().map(|&i| t[i].clone()).collect()).collect()
}

fn column(ctx: &Ctx<'_>, pop: &Population, role: &RoleId) -> Result<Vec<Instance>, EvalError> {
    let (r, idx) = owner(ctx, pop, core::slice::from_ref(role))?;
    Ok(r.tuples.iter().map(|t| t[idx[0]].clone()).collect())
}

/// Evaluates one constraint over a full population. Returns a witness of
/// the violation, or `None` when the constraint holds.
pub fn eval_constraint(ctx: &Ctx<'_>, pop: &Population, k: &Constraint) -> Result<Option<String>, EvalError> {
    let u = &ctx.schema.universe;
    match &k.kind {
        ConstraintKind::Unique(roles) => {
            let (r, idx) = owner(ctx, pop, roles)?;
            let mut seen = BTreeSet::new();
            for t in &r.tuples {
                let key: Vec<Instance> = idx.iter().map(|&i| t[i].clone()).collect();
                if !seen.insert(key.clone()) {
                    return Ok(Some(format!("{} occurs twice", show(&key))));
                }
            }
            Ok(None)
        }
        ConstraintKind::Mandatory(roles) => {
            let mut players = BTreeSet::new();
            let mut played = BTreeSet::new();
            for r in roles {
                let p = u.player.get(r).ok_or_else(|| EvalError::UnknownRole(r.clone()))?;
                players.extend(ctx.objects(pop, p)?);
                played.extend(column(ctx, pop, r)?);
            }
            Ok(players.difference(&played).next().map(|x| format!("{x} plays none of {roles:?}")))
        }
        ConstraintKind::EachIsIn(t, vals) => {
            let xs = ctx.objects(pop, t)?;
            let allowed: BTreeSet<Instance> = if u.is_value_type(t) {
                vals.iter().cloned().map(Instance::Value).collect()
            } else {
                vals.iter().map(|v| Instance::abstract_of(t, v.clone())).collect()
            };
            Ok(xs.iter().find(|x| !allowed.contains(*x)).map(|x| format!("{x} is not allowed in {t}")))
        }
        ConstraintKind::Frequency { role, min, max } => {
            let mut counts: BTreeMap<Instance, u32> = BTreeMap::new();
            for x in column(ctx, pop, role)? {
                *counts.entry(x).or_default() += 1;
            }
            Ok(counts
                .into_iter()
                .find(|(_, n)| n < min || n > max)
                .map(|(x, n)| format!("{x} plays {role} {n} times")))
        }
        ConstraintKind::Exclusion(sets) => {
            let projs = sets
                .iter()
                .map(|s| owner(ctx, pop, s).map(|(r, idx)| project(r, &idx)))
                .collect::<Result<Vec<_>, _>>()?;
            for i in 0..projs.len() {
                for j in i + 1..projs.len() {
                    if let Some(x) = projs[i].intersection(&projs[j]).next() {
                        return Ok(Some(format!("{} in both {:?} and {:?}", show(x), sets[i], sets[j])));
                    }
                }
            }
            Ok(None)
        }
        ConstraintKind::Subset(pairs) | ConstraintKind::Equality(pairs) => {
            let (l, r): (Vec<RoleId>, Vec<RoleId>) = pairs.iter().cloned().unzip();
            let (lr, li) = owner(ctx, pop, &l)?;
            let (rr, ri) = owner(ctx, pop, &r)?;
            let (a, b) = (project(lr, &li), project(rr, &ri));
            if let Some(x) = a.difference(&b).next() {
                return Ok(Some(format!("{} in {l:?} but not in {r:?}", show(x))));
            }
            if matches!(k.kind, ConstraintKind::Equality(_)) {
                if let Some(x) = b.difference(&a).next() {
                    return Ok(Some(format!("{} in {r:?} but not in {l:?}", show(x))));
                }
            }
            Ok(None)
        }
        ConstraintKind::ExternalUnique(roles) => external_unique(ctx, pop, roles),
        ConstraintKind::Cardinality(t, n) => {
            let m = ctx.objects(pop, t)?.len();
            Ok((m != *n as usize).then(|| format!("{t} has {m} instances")))
        }
    }
}

/// Each combination of instances in `roles`, taken over the relationship
/// types joined on their common remaining role, identifies at most one
/// instance of the common player.
fn external_unique(ctx: &Ctx<'_>, pop: &Population, roles: &[RoleId]) -> Result<Option<String>, EvalError> {
    let u = &ctx.schema.universe;
    let mut groups: BTreeMap<TypeId, Vec<RoleId>> = BTreeMap::new();
    for r in roles {
        let rel = u.rel_of(r).ok_or_else(|| EvalError::UnknownRole(r.clone()))?;
        groups.entry(rel.clone()).or_default().push(r.clone());
    }
    let mut common: Option<TypeId> = None;
    // For each group: the relation, indexes of the constrained roles, index of the join role.
    let mut parts = Vec::new();
    for (rel, rs) in &groups {
        let all = u.roles_of(rel).unwrap_or(&[]);
        let rest: Vec<&RoleId> = all.iter().filter(|r| !rs.contains(r)).collect();
        if rest.len() != 1 {
            return Err(EvalError::Unsupported(format!("external uniqueness over {rel} needs exactly one join role")));
        }
        let p = u.player.get(rest[0]).cloned().ok_or_else(|| EvalError::UnknownRole(rest[0].clone()))?;
        if common.get_or_insert_with(|| p.clone()) != &p {
            return Err(EvalError::Unsupported("external uniqueness joins different players".into()));
        }
        let r = ctx.relation(pop, rel)?;
        let idx: Vec<usize> = rs.iter().map(|x| r.index_of(x).unwrap()).collect();
        parts.push((r, idx, r.index_of(rest[0]).unwrap()));
    }
    let mut per_instance: BTreeMap<Instance, Vec<Vec<Instance>>> = BTreeMap::new();
    for (i, (r, idx, j)) in parts.iter().enumerate() {
        let mut by: BTreeMap<Instance, Vec<Vec<Instance>>> = BTreeMap::new();
        for t in &r.tuples {
            by.entry(t[*j].clone()).or_default().push(idx.iter().map(|&k| t[k].clone()).collect());
        }
        if i == 0 {
            per_instance = by;
        } else {
            per_instance = per_instance
                .into_iter()
                .filter_map(|(x, combos)| {
                    let more = by.get(&x)?;
                    let joined = combos
                        .iter()
                        .flat_map(|c| more.iter().map(move |m| c.iter().chain(m).cloned().collect::<Vec<_>>()))
                        .collect();
                    Some((x, joined))
                })
                .collect();
        }
    }
    let mut owner_of: BTreeMap<Vec<Instance>, Instance> = BTreeMap::new();
    for (x, combos) in per_instance {
        for c in combos {
            if let Some(prev) = owner_of.insert(c.clone(), x.clone()) {
                if prev != x {
                    return Ok(Some(format!("{} identifies both {prev} and {x}", show(&c))));
                }
            }
        }
    }
    Ok(None)
}
