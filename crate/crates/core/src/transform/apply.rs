use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::cleanup::{cleanup, CleanupOptions, CleanupTrace};
use super::TransformError;
use crate::name::TypeId;
use crate::rule::Rule;
use crate::schema::{is_sch, Schema};
use crate::scheme::InstantiatedTransformation;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// The From types stay as internal derived types.
    Alternative,
    /// The To types are added next to the From types.
    Enrich,
    /// The To types become the internal storage; the From types are derived.
    Optimise,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Alternative => "alternative",
            Mode::Enrich => "enrich",
            Mode::Optimise => "optimise",
        })
    }
}

impl core::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "alternative" | "alt" => Ok(Mode::Alternative),
            "enrich" => Ok(Mode::Enrich),
            "optimise" | "optimize" | "opt" => Ok(Mode::Optimise),
            _ => Err(format!("unknown mode `{s}`")),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ApplyOptions {
    pub cleanup: CleanupOptions,
    /// Lets a To type already exist as a derived type with the same roles.
    /// Its derivation rule in the schema and its update rule in the
    /// transformation are dropped, so it becomes stored again.
    pub rematerialise: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ApplicabilityReport {
    /// From types missing from the schema or defined by a rule there.
    pub from_problems: Vec<String>,
    /// To types already in the schema.
    pub to_problems: Vec<String>,
    pub rematerialised: BTreeSet<TypeId>,
}

impl ApplicabilityReport {
    pub fn ok(&self) -> bool {
        self.from_problems.is_empty() && self.to_problems.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.from_problems.iter().chain(&self.to_problems).cloned().collect()
    }
}

#[derive(Clone, Debug)]
pub struct Applied {
    pub schema: Schema,
    pub trace: CleanupTrace,
    pub rematerialised: BTreeSet<TypeId>,
}

fn same_roles(s: &Schema, inst: &InstantiatedTransformation, t: &TypeId) -> bool {
    match (s.universe.roles_of(t), inst.roles_of(t)) {
        (Some(a), Some(b)) => {
            let x: BTreeSet<_> = a.iter().map(|r| (s.universe.player.get(r), r)).collect();
            let y: BTreeSet<_> = b.iter().map(|(p, r)| (Some(p), r)).collect();
            x == y
        }
        (None, None) => s.universe.is_value_type(t) == inst.is_value_type(t),
        _ => false,
    }
}

pub fn check_applicability(inst: &InstantiatedTransformation, s: &Schema, rematerialise: bool) -> ApplicabilityReport {
    let mut rep = ApplicabilityReport::default();
    let types = s.types();
    let ruled = s.ruled_types();
    for t in &inst.from_of().types {
        if !types.contains(t) {
            rep.from_problems.push(format!("From type {t} is not in {}", s.name));
        } else if ruled.contains(t) {
            rep.from_problems.push(format!("From type {t} is derived in {}", s.name));
        }
    }
    let derived = s.derived_types();
    for t in inst.to_of().types.intersection(&types) {
        if rematerialise && derived.contains(t) && same_roles(s, inst, t) {
            rep.rematerialised.insert(t.clone());
        } else {
            rep.to_problems.push(format!("To type {t} is already in {}", s.name));
        }
    }
    rep
}

/// Joins the transformation into `s` under `mode`, runs CleanUp and checks
/// that the result is a schema version.
pub fn apply(inst: &InstantiatedTransformation, s: &Schema, mode: Mode, opts: &ApplyOptions) -> Result<Applied, TransformError> {
    let rep = check_applicability(inst, s, opts.rematerialise);
    if !rep.ok() {
        return Err(TransformError::NotApplicable(rep.messages()));
    }
    let remat = rep.rematerialised;
    let mut j = s.clone();
    let u = &mut j.universe;
    let before = s.types();
    for t in &inst.object_types {
        if u.object_types.insert(t.clone()) && inst.is_value_type(t) {
            u.value_types.insert(t.clone());
            let d = inst.value_types.iter().find(|(v, _)| v == t).and_then(|(_, d)| d.clone());
            if let Some(d) = d {
                j.domains.entry(d.clone()).or_insert(None);
                j.dom.insert(t.clone(), d);
            }
        }
    }
    for (t, rs) in &inst.relationship_types {
        if !u.relationship_types.contains_key(t) {
            u.relationship_types.insert(t.clone(), rs.iter().map(|(_, r)| r.clone()).collect());
            for (p, r) in rs {
                u.player.insert(r.clone(), p.clone());
            }
        }
    }
    match mode {
        Mode::Alternative => j.internal.extend(inst.from_of().types),
        Mode::Enrich => {}
        Mode::Optimise => j.internal.extend(inst.to_of().types.difference(&before).cloned()),
    }
    let keep = |r: &&Rule| !remat.contains(&r.defines);
    j.derivation_rules = s.derivation_rules.iter().filter(keep).chain(&inst.derivation_rules).cloned().collect();
    j.update_rules = s.update_rules.iter().chain(inst.update_rules.iter().filter(keep)).cloned().collect();
    for k in inst.to_of().constraints {
        match j.constraint(&k.id) {
            Some(e) if *e == k => {}
            Some(_) => return Err(TransformError::ConstraintClash(k.id)),
            None => j.constraints.push(k),
        }
    }
    let (schema, trace) = cleanup(&j, &opts.cleanup)?;
    let axioms = is_sch(&schema);
    if !axioms.ok() {
        let msgs = axioms
            .failures()
            .flat_map(|c| c.witnesses.iter().map(move |w| format!("{}: {w}", c.name)))
            .collect();
        return Err(TransformError::InvalidResult(msgs));
    }
    Ok(Applied { schema, trace, rematerialised: remat })
}

pub fn apply_alternative(inst: &InstantiatedTransformation, s: &Schema, opts: &ApplyOptions) -> Result<Applied, TransformError> {
    apply(inst, s, Mode::Alternative, opts)
}

pub fn apply_enrich(inst: &InstantiatedTransformation, s: &Schema, opts: &ApplyOptions) -> Result<Applied, TransformError> {
    apply(inst, s, Mode::Enrich, opts)
}

pub fn apply_optimise(inst: &InstantiatedTransformation, s: &Schema, opts: &ApplyOptions) -> Result<Applied, TransformError> {
    apply(inst, s, Mode::Optimise, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::parse_schema;
    use crate::scheme::{instantiate, invert, parse_parlist, parse_scheme};
    use alloc::string::ToString;

    const RENAME: &str = "Transformation schema Rename (a, r, s);
          Object types: a;
          Relationship types: f = [a:r], g = [a:s];
          From: f;
          To: g;
          Derivation rules: f = PROJ[r=s] g;
          Update rules: g = PROJ[s=r] f;
        End Transformation schema.";

    const BASE: &str = "SCHEMA Base ; OBJECT TYPES A ; RELATIONSHIP TYPES f = [ A : f-1 ] ; END";

    fn setup() -> (InstantiatedTransformation, Schema) {
        let s = parse_schema(BASE).unwrap();
        let t = parse_scheme(RENAME).unwrap();
        let inst = instantiate(&t, &parse_parlist("Rename(A, f-1, g-1)").unwrap(), Some(&s)).unwrap();
        (inst, s)
    }

    fn ids(xs: &[&str]) -> BTreeSet<TypeId> {
        xs.iter().map(|x| TypeId::from(*x)).collect()
    }

    #[test]
    fn modes_differ_only_in_internal_types() {
        let (inst, s) = setup();
        let o = ApplyOptions::default();
        let opt = apply_optimise(&inst, &s, &o).unwrap().schema;
        let enr = apply_enrich(&inst, &s, &o).unwrap().schema;
        let alt = apply_alternative(&inst, &s, &o).unwrap().schema;
        assert_eq!(opt.internal, ids(&["g"]));
        assert!(enr.internal.is_empty());
        assert_eq!(alt.internal, ids(&["f"]));
        for x in [&enr, &alt] {
            assert_eq!(x.universe, opt.universe);
            assert_eq!(x.derivation_rules, opt.derivation_rules);
            assert_eq!(x.update_rules, opt.update_rules);
        }
        assert_eq!(opt.ruled_types(), ids(&["f"]));
        assert!(is_sch(&opt).ok());
    }

    #[test]
    fn existing_to_type_is_refused() {
        let (inst, _) = setup();
        let s = parse_schema("SCHEMA x ; OBJECT TYPES A ; RELATIONSHIP TYPES f = [ A : f-1 ] ; g = [ A : g-1 ] ; END").unwrap();
        let rep = check_applicability(&inst, &s, false);
        assert_eq!(rep.to_problems, ["To type g is already in x"]);
        assert!(matches!(apply_optimise(&inst, &s, &ApplyOptions::default()), Err(TransformError::NotApplicable(_))));
    }

    #[test]
    fn missing_from_type_is_refused() {
        let (inst, _) = setup();
        let s = parse_schema("SCHEMA x ; OBJECT TYPES A ; RELATIONSHIP TYPES h = [ A : h-1 ] ; END").unwrap();
        assert_eq!(check_applicability(&inst, &s, false).from_problems, ["From type f is not in x"]);
    }

    #[test]
    fn inverse_restores_with_rematerialise() {
        let (inst, s) = setup();
        let there = apply_optimise(&inst, &s, &ApplyOptions::default()).unwrap().schema;
        let inv = invert(&inst).unwrap();
        assert!(matches!(apply_optimise(&inv, &there, &ApplyOptions::default()), Err(TransformError::NotApplicable(_))));
        let o = ApplyOptions { rematerialise: true, ..Default::default() };
        let back = apply_optimise(&inv, &there, &o).unwrap();
        assert_eq!(back.rematerialised, ids(&["f"]));
        assert_eq!(back.trace.removed(), ids(&["g"]));
        assert_eq!(back.schema, s);
    }

    #[test]
    fn mode_names() {
        assert_eq!("Optimize".parse::<Mode>(), Ok(Mode::Optimise));
        assert_eq!("alt".parse::<Mode>(), Ok(Mode::Alternative));
        assert_eq!(Mode::Enrich.to_string().parse::<Mode>(), Ok(Mode::Enrich));
        assert!("merge".parse::<Mode>().is_err());
    }
}
