//! One line per acceptance criterion. Exits non-zero if any fails.

mod common;

use std::cell::Cell;
use std::time::{Duration, Instant};

use proptest::test_runner::{Config, TestCaseError, TestRunner};

use common::gen::{cleanup_shape, pair_shape, with_fresh};
use common::*;
use ormtx::library::SCHEMES;
use ormtx_core::equivalence::{
    check_bijection, check_direct_equivalence, check_instance_property, check_update_distributivity, MuScope, SchemeProperty, Verdict,
};
use ormtx_core::schema::{serialize_schema, validate};
use ormtx_core::scheme::invert;
use ormtx_core::transform::{apply_enrich, apply_optimise, ApplyOptions, CleanupOptions, PiVariant};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn c1() -> Outcome {
    let ctx = schema("olympics-b.schema");
    let inst = shipped("ot-emission", &ctx);
    let got: Vec<String> = inst.bindings.iter().map(|b| b.to_string()).collect();
    for want in OLYMPICS_BINDINGS {
        ensure(got.iter().any(|g| g == want), || format!("binding `{want}` missing"))?;
    }
    let params = got.iter().filter(|g| !["f[", "g ", "h "].iter().any(|p| g.starts_with(p))).count();
    ensure(params == OLYMPICS_BINDINGS.len(), || format!("{params} parameter bindings, expected {}", OLYMPICS_BINDINGS.len()))?;
    let golden = read("golden/olympics-transformation.txt");
    ensure(inst.to_string() == golden, || "instantiated text differs from the golden file".into())?;
    Ok(format!("{} bindings, golden text matches", OLYMPICS_BINDINGS.len()))
}

fn c2() -> Outcome {
    let ctx = schema("olympics-b.schema");
    let b = bounds("olympics.bounds");
    let inst = shipped("ot-emission", &ctx);
    let p = check_instance_property(&inst, Some(&ctx), &b).map_err(err)?;
    ensure(p.property == SchemeProperty::EquivalencePreserving, || format!("property {}", p.property))?;
    let bij = check_bijection(&inst, Some(&ctx), &b).map_err(err)?;
    ensure(bij.holds(), || format!("not a bijection: {bij:?}"))?;
    Ok(format!("{} = {} states, mu bijective and inverted by the derivation rules", p.comparison.left, p.comparison.right))
}

fn c3() -> Outcome {
    let a = schema("hospital-a.schema");
    let hb = schema("hospital-b.schema");
    let b = bounds("hospital.bounds");
    let inst = shipped("pred-generalise-unary", &a);
    let p = check_instance_property(&inst, Some(&a), &b).map_err(err)?;
    ensure(p.property == SchemeProperty::EquivalencePreserving, || format!("property {}", p.property))?;
    let opts = ApplyOptions { cleanup: CleanupOptions { bounds: Some(b.clone()), ..Default::default() }, ..Default::default() };
    let left = apply_enrich(&inst, &a, &opts).map_err(err)?.schema;
    let inv = invert(&shipped("pred-generalise-unary", &a)).map_err(err)?;
    let right = apply_enrich(&inv, &hb, &opts).map_err(err)?.schema;
    let c = check_direct_equivalence(&left, &right, &b).map_err(err)?;
    ensure(c.verdict == Verdict::Equivalent, || format!("enriched schemas: {}", c.verdict))?;
    Ok(format!("views {} = {} states, enriched schemas {} = {} states", p.comparison.left, p.comparison.right, c.left, c.right))
}

fn c4() -> Outcome {
    let weak = schema("car-driver.schema");
    let b = bounds("car-driver.bounds");
    let inst = shipped("strengthen-split", &weak);
    let strong = apply_optimise(&inst, &weak, &ApplyOptions::default()).map_err(err)?.schema;
    let c = check_direct_equivalence(&weak, &strong, &b).map_err(err)?;
    ensure(c.verdict == Verdict::S2Stronger, || format!("verdict {}", c.verdict))?;
    let w = c.only_left.as_ref().ok_or("no witness")?;
    ensure(c.only_right.is_none(), || "strong side has extra states".into())?;
    let p = check_instance_property(&inst, Some(&weak), &b).map_err(err)?;
    ensure(p.property == SchemeProperty::Strengthening, || format!("instance property {}", p.property))?;
    Ok(format!("split schema stronger ({} vs {} states), witness of {} facts", c.right, c.left, w.size()))
}

fn c5() -> Outcome {
    let ctx = schema("olympics-b.schema");
    let b = bounds("olympics.bounds");
    let inst = shipped("ot-emission", &ctx);
    let d = check_update_distributivity(&inst, Some(&ctx), &b, MuScope::Content).map_err(err)?;
    ensure(d.holds(), || format!("counterexample {:?}", d.counterexample))?;
    let strict = check_update_distributivity(&inst, Some(&ctx), &b, MuScope::Strict).map_err(err)?;
    let cx = strict.counterexample.ok_or("strict mu produced no counterexample")?;
    Ok(format!("{} union and {} difference pairs hold; strict mu fails on {:?}", d.union_pairs, d.minus_pairs, cx.op))
}

fn c6() -> Outcome {
    let cases = Cell::new(0usize);
    let rounds = Cell::new(0usize);
    let mut runner = TestRunner::new_with_rng(Config { cases: 256, failure_persistence: None, ..Config::default() }, TestRunner::deterministic().new_rng());
    runner
        .run(&cleanup_shape(), |shape| {
            let s = shape.schema();
            for pi in [PiVariant::HasSubtypes, PiVariant::HasSupertypes] {
                let n = check_cleanup_laws(&s, pi).map_err(|e| TestCaseError::fail(format!("{pi:?}: {e}\n{}", shape.render())))?;
                rounds.set(rounds.get() + n);
            }
            cases.set(cases.get() + 1);
            Ok(())
        })
        .map_err(err)?;
    ensure(cases.get() >= 200, || format!("only {} schemas", cases.get()))?;
    Ok(format!("{} schemas, both protection readings, {} removing rounds", cases.get(), rounds.get()))
}

fn c7() -> Outcome {
    let b = ormtx_core::bounds::Bounds::default().with_pool("A", 2).with_pool("B", 2);
    let pairs = Cell::new(0usize);
    let mut runner = TestRunner::new_with_rng(Config { cases: 20, failure_persistence: None, ..Config::default() }, TestRunner::deterministic().new_rng());
    runner
        .run(&pair_shape(), |shape| {
            let (s1, s2) = shape.pair();
            let fail = |m: String| TestCaseError::fail(format!("{m}\n{}{}", serialize_schema(&s1), serialize_schema(&s2)));
            let c = check_direct_equivalence(&s1, &s2, &b).map_err(|e| fail(e.to_string()))?;
            if c.verdict != Verdict::Equivalent {
                return Err(fail(format!("generated pair is {}", c.verdict)));
            }
            let c = check_direct_equivalence(&with_fresh(&s1), &with_fresh(&s2), &b).map_err(|e| fail(e.to_string()))?;
            if c.verdict != Verdict::Equivalent {
                return Err(fail(format!("extended pair is {}", c.verdict)));
            }
            pairs.set(pairs.get() + 1);
            Ok(())
        })
        .map_err(err)?;
    ensure(pairs.get() == 20, || format!("{} pairs", pairs.get()))?;
    Ok("20 pairs stay equivalent after adding z with a uniqueness constraint".into())
}

fn c8() -> Outcome {
    for e in SCHEMES {
        let t = e.scheme().map_err(err)?;
        ensure(t.inverted().inverted() == t, || format!("{}: scheme inversion is not an involution", e.name))?;
        let (_, ctx) = SHIPPED_CONTEXTS.iter().find(|(n, _)| *n == e.name).ok_or("no context")?;
        let inst = shipped(e.name, &schema(ctx));
        let twice = invert(&invert(&inst).map_err(err)?).map_err(err)?;
        ensure(twice == inst, || format!("{}: instance inversion is not an involution", e.name))?;
    }
    let ctx = schema("olympics-b.schema");
    let b = bounds("olympics.bounds");
    let inst = shipped("ot-emission", &ctx);
    let cl = CleanupOptions { bounds: Some(b.clone()), ..Default::default() };
    let there = apply_optimise(&inst, &ctx, &ApplyOptions { cleanup: cl.clone(), rematerialise: false }).map_err(err)?.schema;
    let back = apply_optimise(&invert(&inst).map_err(err)?, &there, &ApplyOptions { cleanup: cl, rematerialise: true }).map_err(err)?.schema;
    let c = check_direct_equivalence(&back, &ctx, &b).map_err(err)?;
    ensure(c.verdict == Verdict::Equivalent, || format!("round trip: {}", c.verdict))?;
    let exact = serialize_schema(&back) == serialize_schema(&ctx);
    Ok(format!(
        "{} schemes involutive; round trip {} = {} states{}",
        SCHEMES.len(),
        c.left,
        c.right,
        if exact { ", schema restored exactly" } else { "" }
    ))
}

fn c9() -> Outcome {
    let ok = validate(&schema("olympics-b.schema"));
    for a in AXIOMS {
        ensure(ok.get(a).is_some_and(|c| c.passed()), || format!("{a} does not pass on the valid fixture"))?;
    }
    let mut failing = std::collections::BTreeSet::new();
    let mut check = |label: &str, s: &ormtx_core::Schema, want: &[&str]| -> Result<(), String> {
        let got: Vec<&str> = validate(s).failures().map(|c| c.name).collect();
        let mut want_sorted = want.to_vec();
        want_sorted.sort();
        let mut got_sorted = got.clone();
        got_sorted.sort();
        ensure(got_sorted == want_sorted, || format!("{label}: expected {want:?}, got {got:?}"))?;
        failing.extend(got);
        Ok(())
    };
    for (name, want) in AXIOM_FIXTURES {
        check(name, &schema(&format!("axioms/{name}.schema")), want)?;
    }
    for (label, s, want) in mutated_axiom_fixtures() {
        check(label, &s, want)?;
    }
    let missing: Vec<_> = AXIOMS.iter().filter(|a| !failing.contains(**a)).collect();
    ensure(missing.is_empty(), || format!("no failing fixture for {missing:?}"))?;
    ensure(ok.checks.len() == AXIOMS.len(), || format!("validate runs {} checks, expected {}", ok.checks.len(), AXIOMS.len()))?;
    Ok(format!("{} axioms, each with a passing and a failing fixture", AXIOMS.len()))
}

fn main() {
    let criteria: [(u8, &str, fn() -> Outcome, Option<u64>); 9] = [
        (1, "instantiation table and golden text", c1, Some(1)),
        (2, "OTEmission preserves equivalence", c2, Some(30)),
        (3, "hospital schemas equivalent", c3, Some(60)),
        (4, "split schema is stronger", c4, Some(30)),
        (5, "update distributivity", c5, Some(60)),
        (6, "cleanup laws on random schemas", c6, None),
        (7, "substitution keeps equivalence", c7, Some(120)),
        (8, "inversion", c8, None),
        (9, "axiom suite", c9, None),
    ];
    let mut failed = 0;
    for (n, name, f, limit) in criteria {
        let t = Instant::now();
        let mut r = f();
        let el = t.elapsed();
        if let (Ok(_), Some(s)) = (&r, limit) {
            if el > Duration::from_secs(s) {
                r = Err(format!("took {:.2}s, limit {s}s", el.as_secs_f64()));
            }
        }
        match r {
            Ok(d) => println!("criterion {n}: PASS {name}: {d} ({:.2}s)", el.as_secs_f64()),
            Err(d) => {
                failed += 1;
                println!("criterion {n}: FAIL {name}: {d} ({:.2}s)", el.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
