use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::TransformError;
use crate::bounds::Bounds;
use crate::equivalence::enumerate_state_space;
use crate::error::EvalError;
use crate::name::{RoleId, TypeId};
use crate::population::{eval_constraint, eval_rule, Ctx, Extent, Population};
use crate::rule::{substitute, Rule, RuleExpr, Term};
use crate::schema::{Constraint, Schema};

/// Which types are protected from removal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PiVariant {
    /// Types that have subtypes.
    #[default]
    HasSubtypes,
    /// Types that have supertypes.
    HasSupertypes,
}

#[derive(Clone, Debug, Default)]
pub struct CleanupOptions {
    pub pi: PiVariant,
    /// With bounds, a constraint on a removed type that cannot be rewritten
    /// is dropped when every state of the result satisfies it anyway.
    pub bounds: Option<Bounds>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReduceAction {
    /// Every type it mentions is gone.
    Dropped,
    /// Moved onto the type the removed one was a renaming of.
    Rewritten(Constraint),
    /// Holds in all `states` states of the result.
    Derivable { states: usize },
    /// Kept, together with the types it mentions.
    Retained,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub constraint: Constraint,
    pub action: ReduceAction,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CleanupStep {
    /// Derived, updated, internal types removed.
    pub removed: BTreeSet<TypeId>,
    /// Internal object types that play no role and take part in no
    /// subtyping, removed in the same round.
    pub unconnected: BTreeSet<TypeId>,
    /// Candidates kept because a constraint needs them.
    pub retained: BTreeSet<TypeId>,
    pub reductions: Vec<Reduction>,
    pub removed_domains: BTreeSet<String>,
}

impl CleanupStep {
    pub fn changed(&self) -> bool {
        !self.removed.is_empty() || !self.unconnected.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CleanupTrace {
    pub steps: Vec<CleanupStep>,
}

impl CleanupTrace {
    pub fn removed(&self) -> BTreeSet<TypeId> {
        self.steps.iter().flat_map(|s| s.removed.iter().chain(&s.unconnected)).cloned().collect()
    }
}

fn protected(s: &Schema, pi: PiVariant) -> BTreeSet<TypeId> {
    s.universe
        .sub_of
        .iter()
        .map(|(a, b)| match pi {
            PiVariant::HasSubtypes => b.clone(),
            PiVariant::HasSupertypes => a.clone(),
        })
        .collect()
}

/// Drops object types from `r` while they play a role in a relationship
/// type that stays.
fn close_removal(s: &Schema, mut r: BTreeSet<TypeId>) -> BTreeSet<TypeId> {
    let u = &s.universe;
    loop {
        let stuck: Vec<TypeId> = r
            .iter()
            .filter(|t| u.object_types.contains(*t))
            .filter(|t| u.roles_played_by(t).iter().any(|x| u.rel_of(x).is_some_and(|rel| !r.contains(rel))))
            .cloned()
            .collect();
        if stuck.is_empty() {
            return r;
        }
        for t in stuck {
            r.remove(&t);
        }
    }
}

fn rules_for<'a>(rules: &'a [Rule], ts: &BTreeSet<TypeId>) -> (Vec<Rule>, Vec<Rule>) {
    rules.iter().cloned().partition(|r| ts.contains(&r.defines))
}

/// `PROJ[out = src, ...] b` with the sources covering the roles of `b`
/// one to one gives the renaming `out -> src`.
fn renaming(s: &Schema, body: &RuleExpr) -> Option<BTreeMap<RoleId, RoleId>> {
    let RuleExpr::Proj(bs, inner) = body else { return None };
    let RuleExpr::Ref(b) = inner.as_ref() else { return None };
    let roles: BTreeSet<&RoleId> = s.universe.roles_of(b)?.iter().collect();
    let mut map = BTreeMap::new();
    let mut srcs = BTreeSet::new();
    for x in bs {
        let Term::Role(src) = &x.term else { return None };
        if !roles.contains(src) || !srcs.insert(src) {
            return None;
        }
        map.insert(x.out.clone(), src.clone());
    }
    (srcs.len() == roles.len()).then_some(map)
}

struct Plan {
    removed: BTreeSet<TypeId>,
    unconnected: BTreeSet<TypeId>,
    rd: Vec<Rule>,
    der: Vec<Rule>,
    upd: Vec<Rule>,
}

fn plan(s: &Schema, candidates: &BTreeSet<TypeId>, retained: &BTreeSet<TypeId>) -> Result<Plan, EvalError> {
    let u = &s.universe;
    let removed = close_removal(s, candidates.clone());
    let (rd, der_keep) = rules_for(&s.derivation_rules, &removed);
    let (ru, upd_keep) = rules_for(&s.update_rules, &removed);
    let der = substitute(&der_keep, &rd)?;
    let mut table = ru.clone();
    table.extend(rd.iter().filter(|r| !ru.iter().any(|x| x.defines == r.defines)).cloned());
    let upd = substitute(&upd_keep, &table)?;
    let mentioned: BTreeSet<TypeId> = der.iter().chain(&upd).flat_map(Rule::depends).collect();
    let unconnected = s
        .internal
        .iter()
        .filter(|t| u.object_types.contains(*t) && !removed.contains(*t) && !retained.contains(*t))
        .filter(|t| u.roles_played_by(t).is_empty())
        .filter(|t| !u.sub_of.iter().any(|(a, b)| a == *t || b == *t))
        .filter(|t| !mentioned.contains(*t))
        .cloned()
        .collect();
    Ok(Plan { removed, unconnected, rd, der, upd })
}

fn build(s: &Schema, gone: &BTreeSet<TypeId>, constraints: Vec<Constraint>, der: Vec<Rule>, upd: Vec<Rule>) -> (Schema, BTreeSet<String>) {
    let keep: BTreeSet<TypeId> = s.types().difference(gone).cloned().collect();
    let mut out = s.clone();
    out.universe = s.universe.restrict(&keep);
    out.internal.retain(|t| keep.contains(t));
    out.constraints = constraints;
    out.derivation_rules = der;
    out.update_rules = upd;
    out.dom.retain(|v, _| keep.contains(v));
    let before: BTreeSet<&String> = s.dom.values().collect();
    let after: BTreeSet<String> = out.dom.values().cloned().collect();
    let dropped: BTreeSet<String> = before.into_iter().filter(|d| !after.contains(*d)).cloned().collect();
    out.domains.retain(|d, _| !dropped.contains(d));
    (out, dropped)
}

/// Fills in the removed types of `s` for a population of the reduced
/// schema: removed relationship types by their unfolded rules, removed
/// object types by the instances playing their roles.
fn restore(s: &Schema, unfolded: &[Rule], gone: &BTreeSet<TypeId>, p: &Population) -> Result<Population, EvalError> {
    let u = &s.universe;
    let mut out = p.clone();
    for r in unfolded {
        out.extents.insert(r.defines.clone(), eval_rule(u, r, p)?);
    }
    for t in gone.iter().filter(|t| u.is_entity_type(t)) {
        let mut xs = BTreeSet::new();
        for r in u.roles_played_by(t) {
            if let Some(rel) = u.rel_of(&r).and_then(|rel| out.relation(rel)) {
                xs.extend(rel.column(&r));
            }
        }
        out.extents.insert(t.clone(), Extent::Objects(xs));
    }
    Ok(out)
}

/// One round of CleanUp with Reduce. Returns the reduced schema and what
/// was done; an unchanged schema comes with a step that removed nothing.
pub fn cleanup_step(s: &Schema, opts: &CleanupOptions) -> Result<(Schema, CleanupStep), TransformError> {
    let updated: BTreeSet<TypeId> = s.update_rules.iter().map(|r| r.defines.clone()).collect();
    let prot = protected(s, opts.pi);
    let base: BTreeSet<TypeId> = s
        .derived_types()
        .into_iter()
        .filter(|t| updated.contains(t) && s.internal.contains(t) && !prot.contains(t))
        .collect();
    let mut retained = BTreeSet::new();
    loop {
        let p = plan(s, &base.difference(&retained).cloned().collect(), &retained)?;
        let gone: BTreeSet<TypeId> = p.removed.union(&p.unconnected).cloned().collect();
        let unfolded = substitute(&p.rd, &p.rd)?;
        let mut kept = Vec::new();
        let mut reductions = Vec::new();
        let mut pending = Vec::new();
        for k in &s.constraints {
            let refs = k.referenced_types(&s.universe);
            if refs.is_disjoint(&gone) {
                kept.push(k.clone());
            } else if refs.is_subset(&p.unconnected) {
                reductions.push(Reduction { constraint: k.clone(), action: ReduceAction::Dropped });
            } else if let Some(k2) = rewrite(s, k, &unfolded, &gone) {
                kept.push(k2.clone());
                reductions.push(Reduction { constraint: k.clone(), action: ReduceAction::Rewritten(k2) });
            } else {
                pending.push(k.clone());
            }
        }
        let mut blocked = BTreeSet::new();
        if !pending.is_empty() {
            let (candidate, _) = build(s, &gone, kept.clone(), p.der.clone(), p.upd.clone());
            let derivable = match &opts.bounds {
                Some(b) => derivable(s, &candidate, b, &unfolded, &gone, &pending)?,
                None => alloc::vec![None; pending.len()],
            };
            for (k, d) in pending.iter().zip(derivable) {
                match d {
                    Some(states) => reductions.push(Reduction { constraint: k.clone(), action: ReduceAction::Derivable { states } }),
                    None => blocked.extend(k.referenced_types(&s.universe).intersection(&gone).cloned()),
                }
            }
        }
        if !blocked.is_empty() {
            retained.extend(blocked);
            continue;
        }
        let (out, removed_domains) = build(s, &gone, kept, p.der, p.upd);
        let step = CleanupStep { removed: p.removed, unconnected: p.unconnected, retained, reductions, removed_domains };
        return Ok((out, step));
    }
}

fn rewrite(s: &Schema, k: &Constraint, unfolded: &[Rule], gone: &BTreeSet<TypeId>) -> Option<Constraint> {
    let mut map = BTreeMap::new();
    for t in k.referenced_types(&s.universe).intersection(gone) {
        let r = unfolded.iter().find(|r| &r.defines == t)?;
        map.extend(renaming(s, &r.body)?);
    }
    let k2 = k.rename_roles(&map);
    let u = &s.universe;
    let ok = k2.roles().iter().all(|r| u.rel_of(r).is_some_and(|rel| !gone.contains(rel)))
        && k2.referenced_types(u).is_disjoint(gone);
    ok.then_some(k2)
}

/// For each pending constraint, the number of states of `reduced` in which
/// it holds once the removed types are recomputed, if it holds in all.
fn derivable(
    s: &Schema,
    reduced: &Schema,
    b: &Bounds,
    unfolded: &[Rule],
    gone: &BTreeSet<TypeId>,
    pending: &[Constraint],
) -> Result<Vec<Option<usize>>, TransformError> {
    let space = enumerate_state_space(reduced, b)?;
    let ctx = Ctx::new(s, b);
    let mut ok = alloc::vec![true; pending.len()];
    for p in &space.pops {
        let Ok(full) = restore(s, unfolded, gone, p) else {
            ok.iter_mut().for_each(|x| *x = false);
            break;
        };
        for (i, k) in pending.iter().enumerate() {
            if ok[i] && !matches!(eval_constraint(&ctx, &full, k), Ok(None)) {
                ok[i] = false;
            }
        }
    }
    Ok(ok.into_iter().map(|x| x.then_some(space.len())).collect())
}

/// Runs CleanUp until a round removes nothing. The trace lists the rounds
/// that changed the schema, or the single round that found nothing to do.
pub fn cleanup(s: &Schema, opts: &CleanupOptions) -> Result<(Schema, CleanupTrace), TransformError> {
    let mut cur = s.clone();
    let mut trace = CleanupTrace::default();
    loop {
        let (next, step) = cleanup_step(&cur, opts)?;
        if !step.changed() {
            if trace.steps.is_empty() {
                trace.steps.push(step);
            }
            return Ok((cur, trace));
        }
        trace.steps.push(step);
        cur = next;
    }
}
