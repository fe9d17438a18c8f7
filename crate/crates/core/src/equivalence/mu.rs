//! The update mapping `μ` of an instantiated transformation: the update
//! rules read as a function from populations of the from view to
//! populations of the to view.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{conceptual_types, enumerate_state_space, from_view, to_view, EquivError};
use crate::bounds::Bounds;
use crate::error::EvalError;
use crate::name::TypeId;
use crate::population::{eval_rule, extend_with_derivations, Extent, PopOp, Population};
use crate::rule::{Relation, Rule};
use crate::schema::Schema;
use crate::scheme::InstantiatedTransformation;
use crate::value::Instance;

/// Which update rules take part in `μ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MuScope {
    /// Rules that read the population. Constant rules such as a literal
    /// reference table are context, applied once.
    #[default]
    Content,
    /// Every update rule.
    Strict,
}

fn rules(inst: &InstantiatedTransformation, scope: MuScope) -> Vec<&Rule> {
    inst.update_rules.iter().filter(|r| scope == MuScope::Strict || !r.body.is_constant()).collect()
}

/// Outputs of the rules in scope for a from-side population.
fn outputs(inst: &InstantiatedTransformation, to: &Schema, p: &Population, scope: MuScope) -> Result<Population, EvalError> {
    let mut out = Population::new();
    for r in rules(inst, scope) {
        out.extents.insert(r.defines.clone(), eval_rule(&to.universe, r, p)?);
    }
    Ok(out)
}

/// Base population of the to view for the from-side population `p`: the
/// shared base types are carried over, the update rules fill in what they
/// define, and remaining entity types take the instances playing their
/// roles.
pub fn mu_image(inst: &InstantiatedTransformation, to: &Schema, p: &Population) -> Result<Population, EvalError> {
    let u = &to.universe;
    let base_types = to.base_types();
    let mut base = p.restrict(&base_types);
    base.extents.extend(outputs(inst, to, p, MuScope::Strict)?.extents);
    for t in &base_types {
        if base.get(t).is_none() {
            if let Some(roles) = u.roles_of(t) {
                base.set_relation(t.clone(), Relation::new(roles.to_vec()));
            }
        }
    }
    let mut missing: Vec<TypeId> = base_types.iter().filter(|t| base.get(*t).is_none()).cloned().collect();
    missing.sort_by_key(|t| core::cmp::Reverse(u.supertypes(t).len()));
    for t in missing {
        let mut xs = BTreeSet::new();
        for r in u.roles_played_by(&t) {
            if let Some(rel) = u.rel_of(&r).and_then(|rel| base.relation(rel)) {
                xs.extend(rel.column(&r));
            }
        }
        for sub in u.subtypes(&t) {
            if let Some(ys) = base.objects(&sub) {
                xs.extend(ys.iter().cloned());
            }
        }
        base.set_objects(t, xs);
    }
    Ok(base)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BijectionReport {
    pub from_states: usize,
    pub to_states: usize,
    /// Every image is a valid population of the to view.
    pub images_valid: bool,
    pub injective: bool,
    pub surjective: bool,
    /// Deriving the from side back from each image gives the original.
    pub inverse: bool,
    pub counterexample: Option<String>,
}

impl BijectionReport {
    pub fn holds(&self) -> bool {
        self.images_valid && self.injective && self.surjective && self.inverse
    }
}

/// Checks that `μ` maps the from-view state space one to one onto the
/// to-view state space and that the derivation rules undo it.
pub fn check_bijection(
    inst: &InstantiatedTransformation,
    context: Option<&Schema>,
    b: &Bounds,
) -> Result<BijectionReport, EquivError> {
    let (fv, tv) = (from_view(inst, context), to_view(inst, context));
    let fs = enumerate_state_space(&fv, b)?;
    let ts = enumerate_state_space(&tv, b)?;
    let vocab = conceptual_types(&fv);
    let mut rep = BijectionReport {
        from_states: fs.len(),
        to_states: ts.len(),
        images_valid: true,
        injective: true,
        surjective: true,
        inverse: true,
        counterexample: None,
    };
    let mut images = BTreeSet::new();
    for p in &fs.pops {
        let img = extend_with_derivations(&tv, &mu_image(inst, &tv, p)?)?;
        if !ts.pops.contains(&img) {
            rep.images_valid = false;
            rep.counterexample.get_or_insert_with(|| format!("image of {p} is not valid: {img}"));
        }
        if img.restrict(&vocab) != p.restrict(&vocab) {
            rep.inverse = false;
            rep.counterexample.get_or_insert_with(|| format!("{p} comes back as {}", img.restrict(&vocab)));
        }
        if !images.insert(img.clone()) {
            rep.injective = false;
            rep.counterexample.get_or_insert_with(|| format!("two populations map to {img}"));
        }
    }
    if let Some(q) = ts.pops.difference(&images).next() {
        rep.surjective = false;
        rep.counterexample.get_or_insert_with(|| format!("{q} is not an image"));
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistribCounterexample {
    pub op: PopOp,
    pub p: Population,
    pub x: Population,
    /// `μ(p Θ x)`.
    pub lhs: Population,
    /// `μ(p) Θ μ(x)`.
    pub rhs: Population,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistribReport {
    pub states: usize,
    /// Guarded pairs checked for union and for difference.
    pub union_pairs: u64,
    pub minus_pairs: u64,
    /// Pairs whose combination is not a valid population.
    pub skipped: u64,
    pub counterexample: Option<DistribCounterexample>,
}

impl DistribReport {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

type Atoms = BTreeMap<(TypeId, Vec<Instance>), u32>;

fn encode(p: &Population, atoms: &mut Atoms) -> Result<u128, EquivError> {
    let mut m = 0u128;
    for (t, e) in &p.extents {
        let items: Vec<Vec<Instance>> = match e {
            Extent::Objects(xs) => xs.iter().map(|x| alloc::vec![x.clone()]).collect(),
            Extent::Tuples(r) => r.tuples.iter().cloned().collect(),
        };
        for it in items {
            let n = atoms.len() as u32;
            let bit = *atoms.entry((t.clone(), it)).or_insert(n);
            if bit >= 128 {
                return Err(EquivError::Unsupported("more than 128 distinct facts in the update check".into()));
            }
            m |= 1u128 << bit;
        }
    }
    Ok(m)
}

/// Checks `μ(p Θ x) = μ(p) Θ μ(x)` for union and difference over every
/// pair of valid from-side populations whose combination is valid too.
pub fn check_update_distributivity(
    inst: &InstantiatedTransformation,
    context: Option<&Schema>,
    b: &Bounds,
    scope: MuScope,
) -> Result<DistribReport, EquivError> {
    let (fv, tv) = (from_view(inst, context), to_view(inst, context));
    let space = enumerate_state_space(&fv, b)?;
    let pops: Vec<&Population> = space.pops.iter().collect();
    let n = pops.len() as u64;
    let budget = b.cap.saturating_mul(256);
    if n.saturating_mul(n).saturating_mul(2) > budget {
        return Err(EquivError::SpaceExceeded { visited: n * n * 2, cap: budget });
    }
    let base_types = fv.base_types();
    let (mut in_atoms, mut out_atoms) = (Atoms::new(), Atoms::new());
    let mut masks = Vec::with_capacity(pops.len());
    let mut mus = Vec::with_capacity(pops.len());
    for p in &pops {
        masks.push(encode(&p.restrict(&base_types), &mut in_atoms)?);
        mus.push(encode(&outputs(inst, &tv, p, scope)?, &mut out_atoms)?);
    }
    let mut index: Vec<(u128, usize)> = masks.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    index.sort_unstable();
    let mut rep = DistribReport { states: pops.len(), union_pairs: 0, minus_pairs: 0, skipped: 0, counterexample: None };
    for op in [PopOp::Union, PopOp::Minus] {
        for i in 0..pops.len() {
            for j in 0..pops.len() {
                let (m, lhs_rhs) = match op {
                    PopOp::Union => (masks[i] | masks[j], mus[i] | mus[j]),
                    PopOp::Minus => (masks[i] & !masks[j], mus[i] & !mus[j]),
                };
                let Ok(at) = index.binary_search_by(|(k, _)| k.cmp(&m)) else {
                    rep.skipped += 1;
                    continue;
                };
                match op {
                    PopOp::Union => rep.union_pairs += 1,
                    PopOp::Minus => rep.minus_pairs += 1,
                }
                let k = index[at].1;
                if mus[k] != lhs_rhs {
                    let out = |q: &Population| outputs(inst, &tv, q, scope);
                    rep.counterexample = Some(DistribCounterexample {
                        op,
                        p: pops[i].clone(),
                        x: pops[j].clone(),
                        lhs: out(pops[k])?,
                        rhs: out(pops[i])?.combine(&out(pops[j])?, op)?,
                    });
                    return Ok(rep);
                }
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::parse_schema;
    use crate::scheme::{instantiate, parse_parlist, parse_scheme};
    use crate::name::RoleId;
    use crate::testing::{OLYMPICS_B, OLYMPICS_LIST, OT_EMISSION};
    use crate::value::{Instance, Value};

    fn setup() -> (InstantiatedTransformation, Schema) {
        let s = parse_schema(OLYMPICS_B).unwrap();
        let inst = instantiate(&parse_scheme(OT_EMISSION).unwrap(), &parse_parlist(OLYMPICS_LIST).unwrap(), Some(&s)).unwrap();
        (inst, s)
    }

    fn small() -> Bounds {
        Bounds::default()
            .with_pool("Country", 1)
            .with_domain("nat", [Value::Int(1)])
            .with_domain("char", ["G", "S", "B"].map(Value::str))
    }

    #[test]
    fn image_of_one_gold_medal() {
        let (inst, s) = setup();
        let to = to_view(&inst, Some(&s));
        let nl = Instance::abstract_of(&"Country".into(), Value::str("NL"));
        let mut p = Population::new();
        p.set_objects("Country", [nl.clone()]);
        let cols = |a: &str| alloc::vec![RoleId::from(alloc::format!("{a}-1").as_str()), RoleId::from(alloc::format!("{a}-2").as_str())];
        p.set_relation("won-gold-in", Relation::with_tuples(cols("won-gold-in"), [alloc::vec![nl.clone(), Instance::Value(Value::Int(2))]]));
        p.set_relation("won-silver-in", Relation::new(cols("won-silver-in")));
        p.set_relation("won-bronze-in", Relation::new(cols("won-bronze-in")));
        let img = mu_image(&inst, &to, &p).unwrap();
        let gold = Instance::abstract_of(&"MedalKind".into(), Value::str("G"));
        let w = img.relation(&"won-medals-of-in".into()).unwrap();
        assert_eq!(w.len(), 1);
        let t = &w.tuples.iter().next().unwrap();
        assert!(t.contains(&nl) && t.contains(&gold) && t.contains(&Instance::Value(Value::Int(2))));
        // The literal reference table comes along in full.
        assert_eq!(img.relation(&"MedalKind.code".into()).unwrap().len(), 3);
        assert_eq!(img.objects(&"MedalKind".into()).unwrap().len(), 3);
    }

    #[test]
    fn bijection_at_small_bounds() {
        let (inst, s) = setup();
        let r = check_bijection(&inst, Some(&s), &small()).unwrap();
        assert!(r.holds(), "{r:?}");
        assert_eq!(r.from_states, r.to_states);
    }

    #[test]
    fn distributivity_depends_on_scope() {
        let (inst, s) = setup();
        let d = check_update_distributivity(&inst, Some(&s), &small(), MuScope::Content).unwrap();
        assert!(d.holds());
        assert_eq!(d.union_pairs + d.minus_pairs + d.skipped, (d.states * d.states * 2) as u64);
        let strict = check_update_distributivity(&inst, Some(&s), &small(), MuScope::Strict).unwrap();
        let c = strict.counterexample.unwrap();
        assert_eq!(c.op, PopOp::Minus);
    }
}
