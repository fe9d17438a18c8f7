//! Bounded enumeration of state spaces.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::EquivError;
use crate::bounds::Bounds;
use crate::error::EvalError;
use crate::name::TypeId;
use crate::population::{eval_constraint, is_pop, Ctx, Extent, PopKind, Population};
use crate::rule::Relation;
use crate::schema::{ConstraintKind, Schema};
use crate::value::{Instance, Value};

/// All valid populations of a schema under some bounds.
#[derive(Clone, Debug)]
pub struct StateSpace {
    pub schema: Schema,
    pub bounds: Bounds,
    /// Full populations in canonical order.
    pub pops: BTreeSet<Population>,
    /// Search nodes visited.
    pub visited: u64,
}

impl StateSpace {
    pub fn len(&self) -> usize {
        self.pops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pops.is_empty()
    }
}

/// Instances an entity type may draw on: its pool, the `Val` images the
/// rules mention, the images of its reference values, and the candidates
/// of its subtypes.
pub fn object_candidates(s: &Schema, b: &Bounds, t: &TypeId) -> BTreeSet<Instance> {
    let ctx = Ctx::new(s, b);
    let own = |t: &TypeId| {
        let mut out: BTreeSet<Instance> = (0..b.pools.get(t).copied().unwrap_or(0))
            .map(|k| Instance::abstract_of(t, Value::str(alloc::format!("#{k}"))))
            .collect();
        let mut vals = BTreeSet::new();
        for r in s.derivation_rules.iter().chain(&s.update_rules) {
            r.body.val_literals(t, &mut vals);
        }
        for rel in s.universe.relationship_types.keys() {
            if let Some((_, vr, ent)) = s.universe.reference_roles(rel) {
                if &ent == t {
                    if let Some(d) = s.universe.player.get(&vr).and_then(|v| ctx.value_domain(v)) {
                        vals.extend(d);
                    }
                }
            }
        }
        out.extend(vals.into_iter().map(|v| Instance::abstract_of(t, v)));
        out
    };
    let mut out = own(t);
    for sub in s.universe.subtypes(t) {
        out.extend(own(&sub));
    }
    out
}

enum Level {
    Objects(TypeId),
    Tuples(TypeId),
}

/// Uniqueness or maximum frequency over columns of one relation, checked
/// while its tuples are chosen.
struct Local {
    cols: Vec<usize>,
    max: u32,
}

struct Search<'a> {
    ctx: Ctx<'a>,
    levels: Vec<Level>,
    /// Constraints that can be decided once the level with this index is set.
    checks_at: Vec<Vec<usize>>,
    locals: BTreeMap<TypeId, Vec<Local>>,
    derived: BTreeSet<TypeId>,
    visited: u64,
    out: BTreeSet<Population>,
}

/// Enumerates every valid population of `s`. Entity types range over
/// subsets of their candidates and relationship types over subsets of the
/// tuples their players allow; derived types are then computed and the
/// result checked. Constraints are tested as soon as the types they read
/// are fixed, and uniqueness and frequency limits prune tuple choices.
pub fn enumerate_state_space(s: &Schema, b: &Bounds) -> Result<StateSpace, EquivError> {
    let ctx = Ctx::new(s, b);
    let u = &s.universe;
    let base = s.base_types();
    let derived = s.derived_types();

    let mut objects: Vec<TypeId> = base.iter().filter(|t| u.is_entity_type(t)).cloned().collect();
    objects.sort_by_key(|t| u.supertypes(t).len());
    let mut levels: Vec<Level> = objects.into_iter().map(Level::Objects).collect();
    levels.extend(base.iter().filter(|t| u.is_relationship_type(t)).cloned().map(Level::Tuples));

    let position: BTreeMap<&TypeId, usize> = levels
        .iter()
        .enumerate()
        .map(|(i, l)| match l {
            Level::Objects(t) | Level::Tuples(t) => (t, i),
        })
        .collect();
    let mut checks_at = alloc::vec![Vec::new(); levels.len()];
    let mut locals: BTreeMap<TypeId, Vec<Local>> = BTreeMap::new();
    for (ci, k) in s.constraints.iter().enumerate() {
        let mut needs = k.referenced_types(u);
        for r in k.roles() {
            if let Some(p) = u.player.get(&r) {
                needs.insert(p.clone());
            }
        }
        let mut at = Some(0usize);
        for t in needs.iter().filter(|t| !u.is_value_type(t)) {
            at = match (at, position.get(t)) {
                (Some(a), Some(&p)) => Some(a.max(p)),
                _ => None,
            };
        }
        if let (Some(at), false) = (at, levels.is_empty()) {
            checks_at[at].push(ci);
        }
        let local = match &k.kind {
            ConstraintKind::Unique(rs) => Some((rs.clone(), 1)),
            ConstraintKind::Frequency { role, max, .. } => Some((alloc::vec![role.clone()], *max)),
            _ => None,
        };
        if let Some((rs, max)) = local {
            if let Some(rel) = rs.first().and_then(|r| u.rel_of(r)) {
                if let Some(roles) = u.roles_of(rel) {
                    let cols: Option<Vec<usize>> = rs.iter().map(|r| roles.iter().position(|x| x == r)).collect();
                    if let Some(cols) = cols {
                        locals.entry(rel.clone()).or_default().push(Local { cols, max });
                    }
                }
            }
        }
    }

    let mut search = Search { ctx, levels, checks_at, locals, derived, visited: 0, out: BTreeSet::new() };
    search.level(0, &mut Population::new())?;
    Ok(StateSpace { schema: s.clone(), bounds: b.clone(), pops: search.out, visited: search.visited })
}

impl Search<'_> {
    fn tick(&mut self) -> Result<(), EquivError> {
        self.visited += 1;
        if self.visited > self.ctx.bounds.cap {
            return Err(EquivError::SpaceExceeded { visited: self.visited, cap: self.ctx.bounds.cap });
        }
        Ok(())
    }

    fn level(&mut self, i: usize, pop: &mut Population) -> Result<(), EquivError> {
        self.tick()?;
        if i == self.levels.len() {
            let rep = is_pop(&self.ctx, pop, PopKind::Base)?;
            if rep.ok() {
                let full = crate::population::extend_with_derivations(self.ctx.schema, pop)?;
                self.out.insert(full);
            }
            return Ok(());
        }
        match &self.levels[i] {
            Level::Objects(t) => {
                let t = t.clone();
                let mut cands = object_candidates(self.ctx.schema, self.ctx.bounds, &t);
                for sup in self.ctx.schema.universe.supertypes(&t) {
                    if let Some(xs) = pop.objects(&sup) {
                        cands = cands.intersection(xs).cloned().collect();
                    }
                }
                let cands: Vec<Instance> = cands.into_iter().collect();
                if cands.len() >= 63 {
                    return Err(EquivError::SpaceExceeded { visited: self.visited, cap: self.ctx.bounds.cap });
                }
                for mask in 0u64..(1u64 << cands.len()) {
                    let xs = cands.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, x)| x.clone());
                    pop.set_objects(t.clone(), xs);
                    if self.passes(i, pop)? {
                        self.level(i + 1, pop)?;
                    }
                }
                pop.extents.remove(&t);
            }
            Level::Tuples(t) => {
                let t = t.clone();
                let cands = self.tuple_candidates(&t, pop)?;
                let roles = self.ctx.schema.universe.roles_of(&t).unwrap_or(&[]).to_vec();
                let mut counts: Vec<BTreeMap<Vec<Instance>, u32>> =
                    alloc::vec![BTreeMap::new(); self.locals.get(&t).map_or(0, Vec::len)];
                let mut chosen = Vec::new();
                self.subsets(i, &t, &roles, &cands, 0, &mut chosen, &mut counts, pop)?;
                pop.extents.remove(&t);
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn subsets(
        &mut self,
        i: usize,
        t: &TypeId,
        roles: &[crate::name::RoleId],
        cands: &[Vec<Instance>],
        k: usize,
        chosen: &mut Vec<Vec<Instance>>,
        counts: &mut [BTreeMap<Vec<Instance>, u32>],
        pop: &mut Population,
    ) -> Result<(), EquivError> {
        if k == cands.len() {
            pop.set_relation(t.clone(), Relation::with_tuples(roles.to_vec(), chosen.iter().cloned()));
            if self.passes(i, pop)? {
                self.level(i + 1, pop)?;
            }
            return Ok(());
        }
        self.subsets(i, t, roles, cands, k + 1, chosen, counts, pop)?;
        let tup = &cands[k];
        let keys: Vec<Vec<Instance>> = self
            .locals
            .get(t)
            .map(|ls| ls.iter().map(|l| l.cols.iter().map(|&c| tup[c].clone()).collect()).collect())
            .unwrap_or_default();
        let fits = self.locals.get(t).map_or(true, |ls| {
            ls.iter().zip(&keys).zip(counts.iter()).all(|((l, key), m)| m.get(key).copied().unwrap_or(0) < l.max)
        });
        if fits {
            for (key, m) in keys.iter().zip(counts.iter_mut()) {
                *m.entry(key.clone()).or_default() += 1;
            }
            chosen.push(tup.clone());
            self.subsets(i, t, roles, cands, k + 1, chosen, counts, pop)?;
            chosen.pop();
            for (key, m) in keys.iter().zip(counts.iter_mut()) {
                *m.get_mut(key).unwrap() -= 1;
            }
        }
        Ok(())
    }

    fn passes(&self, i: usize, pop: &Population) -> Result<bool, EquivError> {
        for &ci in &self.checks_at[i] {
            match eval_constraint(&self.ctx, pop, &self.ctx.schema.constraints[ci]) {
                Ok(Some(_)) => return Ok(false),
                Ok(None) => {}
                Err(EvalError::MissingBase(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(true)
    }

    fn tuple_candidates(&self, t: &TypeId, pop: &Population) -> Result<Vec<Vec<Instance>>, EquivError> {
        let s = self.ctx.schema;
        let u = &s.universe;
        let roles = u.roles_of(t).unwrap_or(&[]);
        let mut cols: Vec<Vec<Instance>> = Vec::new();
        for r in roles {
            let p = u.player.get(r).ok_or_else(|| EvalError::UnknownRole(r.clone()))?;
            let xs: Vec<Instance> = if u.is_value_type(p) {
                self.ctx.objects(pop, p)?.into_iter().collect()
            } else if let (false, Some(xs)) = (self.derived.contains(p), pop.get(p)) {
                match xs {
                    Extent::Objects(xs) => xs.iter().cloned().collect(),
                    Extent::Tuples(_) => return Err(EquivError::Unsupported(alloc::format!("{p} plays a role and is a relationship type"))),
                }
            } else if u.is_relationship_type(p) {
                return Err(EquivError::Unsupported(alloc::format!("objectified relationship type {p}")));
            } else {
                object_candidates(s, self.ctx.bounds, p).into_iter().collect()
            };
            cols.push(xs);
        }
        let mut out: Vec<Vec<Instance>> = alloc::vec![Vec::new()];
        for col in &cols {
            out = out.iter().flat_map(|pre| col.iter().map(move |x| {
                let mut v = pre.clone();
                v.push(x.clone());
                v
            })).collect();
        }
        if let Some((er, vr, ent)) = u.reference_roles(t) {
            let ei = roles.iter().position(|r| *r == er).unwrap();
            let vi = roles.iter().position(|r| *r == vr).unwrap();
            out.retain(|tup| matches!((&tup[ei], &tup[vi]), (Instance::Abstract { ty, tag }, Instance::Value(v)) if *ty == ent && tag == v));
        }
        Ok(out)
    }
}
