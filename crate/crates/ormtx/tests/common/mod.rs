#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use ormtx::library::entry;
use ormtx_core::bounds::{parse_bounds, Bounds};
use ormtx_core::schema::parse_schema;
use ormtx_core::scheme::{instantiate, parse_parlist, InstantiatedTransformation};
use ormtx_core::transform::{cleanup, cleanup_step, CleanupOptions, PiVariant};
use ormtx_core::{Constraint, ConstraintKind, Schema, TypeId};

pub mod gen;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn schema(rel: &str) -> Schema {
    parse_schema(&read(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn bounds(rel: &str) -> Bounds {
    parse_bounds(&read(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// A shipped scheme instantiated with its sample list against `context`.
pub fn shipped(name: &str, context: &Schema) -> InstantiatedTransformation {
    let e = entry(name).unwrap();
    instantiate(&e.scheme().unwrap(), &e.example_parlist().unwrap(), Some(context)).unwrap()
}

pub fn fixture_instance(scheme: &str, parlist: &str, context: &Schema) -> InstantiatedTransformation {
    let t = ormtx_core::scheme::parse_scheme(&read(scheme)).unwrap();
    instantiate(&t, &parse_parlist(&read(parlist)).unwrap(), Some(context)).unwrap()
}

/// The instantiation table for the Olympics example, written out by hand.
pub const OLYMPICS_BINDINGS: &[&str] = &[
    "x[1] = Country",
    "x[2] = Quantity",
    "r[1,1] = won-gold-in-1",
    "r[2,1] = won-gold-in-2",
    "r[1,2] = won-silver-in-1",
    "r[2,2] = won-silver-in-2",
    "r[1,3] = won-bronze-in-1",
    "r[2,3] = won-bronze-in-2",
    "s[1] = won-medals-of-in-1",
    "s[2] = won-medals-of-in-3",
    "t = won-medals-of-in-2",
    "y = MedalKind",
    "u = MedalKind.code-1",
    "v = MedalKind.code-2",
    "l = code",
    "d = char",
    "i[1] = 'G'",
    "i[2] = 'S'",
    "i[3] = 'B'",
];

/// Text fixtures with the exact set of axioms each one violates.
pub const AXIOM_FIXTURES: &[(&str, &[&str])] = &[
    ("type-classes", &["ISU type classes"]),
    ("player-range", &["ISU player range", "ISV player presence"]),
    ("transitive", &["ISU transitive"]),
    ("irreflexive", &["ISU irreflexive"]),
    ("separation", &["ISU separation"]),
    ("identification-induction", &["ISU irreflexive", "ISU identification induction"]),
    ("supertype-presence", &["ISU type classes", "ISV supertype presence"]),
    ("connectivity", &["ISV connectivity"]),
    ("domain-assignment", &["CSV complete domain assignment"]),
    ("unique-rules", &["CSV unique rules"]),
    ("update-completeness", &["CSV update rule completeness"]),
    ("rule-scope", &["rule scope"]),
    ("rule-acyclicity", &["rule acyclicity"]),
];

/// Every axiom `validate` knows.
pub const AXIOMS: &[&str] = &[
    "ISU type classes",
    "ISU type exclusion",
    "ISU role partition",
    "ISU player range",
    "ISU transitive",
    "ISU irreflexive",
    "ISU separation",
    "ISU identification induction",
    "ISV player presence",
    "ISV supertype presence",
    "ISV connectivity",
    "CSV complete domain assignment",
    "CSV unique rules",
    "CSV update rule completeness",
    "internal types",
    "constraint references",
    "rule scope",
    "rule acyclicity",
];

/// Broken schemas the text format cannot express, built by editing a
/// valid one.
pub fn mutated_axiom_fixtures() -> Vec<(&'static str, Schema, &'static [&'static str])> {
    let base = schema("olympics-b.schema");
    let mut out = Vec::new();

    let mut s = base.clone();
    s.universe.object_types.insert("won-gold-in".into());
    out.push(("object and relationship type", s, TYPE_EXCLUSION));

    let mut s = base.clone();
    let shared = s.universe.relationship_types["won-gold-in"][0].clone();
    s.universe.relationship_types.get_mut("won-silver-in").unwrap().push(shared);
    out.push(("role in two relationship types", s, ROLE_PARTITION));

    let mut s = base.clone();
    s.internal.insert("Ghost".into());
    out.push(("unknown internal type", s, &["internal types"]));

    let mut s = base;
    s.constraints.push(Constraint::new("k9", ConstraintKind::Unique(vec!["nowhere-1".into()])));
    out.push(("constraint on an unknown role", s, &["constraint references"]));
    out
}

pub const TYPE_EXCLUSION: &[&str] = &["ISU type exclusion"];
pub const ROLE_PARTITION: &[&str] = &["ISU role partition"];

/// The schema each shipped scheme's sample list is written against.
pub const SHIPPED_CONTEXTS: &[(&str, &str)] = &[
    ("ot-emission", "olympics-b.schema"),
    ("pred-generalise-unary", "hospital-a.schema"),
    ("ot-absorb-context", "rally-a.schema"),
    ("strengthen-split", "car-driver.schema"),
];

/// Enumeration bounds for each shipped scheme's context.
pub const SHIPPED_BOUNDS: &[(&str, &str)] = &[
    ("ot-emission", "olympics.bounds"),
    ("pred-generalise-unary", "hospital.bounds"),
    ("ot-absorb-context", "rally.bounds"),
    ("strengthen-split", "car-driver.bounds"),
];

/// Types with a subtype, or with a supertype for the literal reading.
pub fn protected(s: &Schema, pi: PiVariant) -> BTreeSet<TypeId> {
    s.universe
        .sub_of
        .iter()
        .map(|(sub, sup)| if pi == PiVariant::HasSubtypes { sup.clone() } else { sub.clone() })
        .collect()
}

/// Replays CleanUp one round at a time and checks the laws every round
/// must obey, then idempotence of the fixpoint.
pub fn check_cleanup_laws(s: &Schema, pi: PiVariant) -> Result<usize, String> {
    let opts = CleanupOptions { pi, bounds: None };
    let mut cur = s.clone();
    let mut rounds = 0;
    loop {
        let (next, step) = cleanup_step(&cur, &opts).map_err(|e| e.to_string())?;
        let (before, after) = (cur.types(), next.types());
        if !step.changed() {
            if next != cur {
                return Err("a round that removed nothing changed the schema".into());
            }
            break;
        }
        rounds += 1;
        if after.len() >= before.len() {
            return Err(format!("round {rounds} did not shrink the type set"));
        }
        let gone: BTreeSet<TypeId> = before.difference(&after).cloned().collect();
        if let Some(t) = gone.iter().find(|t| !cur.internal.contains(*t)) {
            return Err(format!("round {rounds} removed conceptual type {t}"));
        }
        if let Some(t) = gone.intersection(&protected(&cur, pi)).next() {
            return Err(format!("round {rounds} removed {t}, which has dependents"));
        }
        if rounds > 64 {
            return Err("no fixpoint after 64 rounds".into());
        }
        cur = next;
    }
    let (fix, trace) = cleanup(s, &opts).map_err(|e| e.to_string())?;
    if fix != cur {
        return Err("cleanup differs from the replayed rounds".into());
    }
    if trace.steps.iter().filter(|st| st.changed()).count() != rounds {
        return Err("trace length differs from the replayed rounds".into());
    }
    let (again, trace2) = cleanup(&fix, &opts).map_err(|e| e.to_string())?;
    if again != fix || trace2.steps.len() != 1 || trace2.steps[0].changed() {
        return Err("cleanup is not idempotent".into());
    }
    Ok(rounds)
}
