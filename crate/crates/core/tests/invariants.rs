use std::collections::BTreeSet;

use ormtx_core::population::{parse_population, serialize_population, PopOp};
use ormtx_core::rule::Relation;
use ormtx_core::schema::{parse_schema, serialize_schema};
use ormtx_core::{Instance, Population, Schema, TypeId, Value};
use proptest::prelude::*;

const HOSPITAL: &str = "SCHEMA HospitalA ;
    DOMAINS names = UNBOUNDED ;
    OBJECT TYPES Patient ;
    VALUE TYPES PatientName : names ;
    RELATIONSHIP TYPES
      has-name = [ Patient : has-name-1, PatientName : has-name-2 ] ;
      smokes = [ Patient : smokes-1 ] ;
      drinks = [ Patient : drinks-1 ] ;
    CONSTRAINTS
      n1 : UNIQUE { has-name-1 } ;
      n2 : MANDATORY { has-name-1 } ;
    END";

fn hospital() -> Schema {
    parse_schema(HOSPITAL).unwrap()
}

fn patient(i: u8) -> Instance {
    Instance::abstract_of(&TypeId::new("Patient"), Value::str(&format!("#{i}")))
}

/// Patients 0..4 with a name each, some of whom smoke or drink.
fn pop() -> impl Strategy<Value = Population> {
    (
        proptest::collection::btree_map(0u8..4, "[a-c]", 0..4),
        proptest::collection::btree_set(0u8..4, 0..4),
        proptest::collection::btree_set(0u8..4, 0..4),
    )
        .prop_map(|(names, smokes, drinks)| {
            let mut p = Population::new();
            p.set_objects("Patient", names.keys().map(|i| patient(*i)));
            p.set_relation(
                "has-name",
                Relation::with_tuples(
                    vec!["has-name-1".into(), "has-name-2".into()],
                    names.iter().map(|(i, n)| vec![patient(*i), Instance::Value(Value::str(n))]),
                ),
            );
            let unary = |role: &str, xs: &BTreeSet<u8>| {
                Relation::with_tuples(vec![role.into()], xs.iter().filter(|i| names.contains_key(i)).map(|i| vec![patient(*i)]))
            };
            p.set_relation("smokes", unary("smokes-1", &smokes));
            p.set_relation("drinks", unary("drinks-1", &drinks));
            p
        })
}

#[test]
fn schema_text_round_trip() {
    let s = hospital();
    assert_eq!(parse_schema(&serialize_schema(&s)).unwrap(), s);
}

#[test]
fn every_role_belongs_to_exactly_one_relationship_type() {
    let u = hospital().universe;
    let mut seen = BTreeSet::new();
    for t in u.types() {
        for r in u.roles_of(&t).unwrap_or(&[]) {
            assert!(seen.insert(r.clone()), "{r} listed twice");
            assert_eq!(u.rel_of(r), Some(&t));
        }
    }
    assert_eq!(seen.len(), 4);
}

proptest! {
    #[test]
    fn population_text_round_trip(p in pop()) {
        let s = hospital();
        prop_assert_eq!(parse_population(&serialize_population("p", &p), &s).unwrap(), p);
    }

    #[test]
    fn union_and_minus(a in pop(), b in pop()) {
        let ab = a.combine(&b, PopOp::Union).unwrap();
        prop_assert_eq!(&ab, &b.combine(&a, PopOp::Union).unwrap());
        prop_assert!(a.is_subset_of(&ab) && b.is_subset_of(&ab));
        let d = a.combine(&b, PopOp::Minus).unwrap();
        prop_assert!(d.is_subset_of(&a));
        prop_assert_eq!(d.combine(&b, PopOp::Union).unwrap(), ab.clone());
        prop_assert!(a.combine(&a, PopOp::Minus).unwrap().extents.values().all(|e| e.is_empty()));
    }
}
