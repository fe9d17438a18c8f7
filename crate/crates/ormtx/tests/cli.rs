mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{fixture, read};

fn ormtx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ormtx")).args(args).output().expect("binary runs")
}

fn f(rel: &str) -> String {
    fixture(rel).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn schemes_lists_the_library() {
    let o = ormtx(&["schemes"]);
    assert_eq!(code(&o), 0);
    for n in ["ot-emission", "pred-generalise-unary", "ot-absorb-context", "strengthen-split"] {
        assert!(stdout(&o).contains(n), "{n} missing");
    }
    let o = ormtx(&["schemes", "ot-emission"]);
    assert!(stdout(&o).starts_with("# Absorb"));
    assert_eq!(code(&ormtx(&["schemes", "nope"])), 2);
}

#[test]
fn validate_exit_codes() {
    assert_eq!(code(&ormtx(&["validate", &f("olympics-a.schema")])), 0);
    let o = ormtx(&["validate", &f("axioms/domain-assignment.schema")]);
    assert_eq!(code(&o), 1);
    let line = stdout(&o).lines().find(|l| l.starts_with("CSV complete domain assignment")).unwrap().to_owned();
    assert!(line.ends_with("FAIL"), "{line}");
    assert_eq!(code(&ormtx(&["validate", "/no/such/file.schema"])), 2);
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&ormtx(&["validate", &write(dir.path(), "empty.schema", "")])), 2);
}

#[test]
fn validate_json() {
    let o = ormtx(&["validate", "--json", &f("axioms/connectivity.schema")]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["ok"], false);
}

#[test]
fn apply_optimise_matches_golden() {
    let o = ormtx(&["apply", &f("olympics-b.schema"), "--scheme", "ot-emission", "--mode", "optimise", "--bounds", &f("olympics.bounds")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), read("golden/olympics-optimised.schema"));
}

#[test]
fn apply_enrich_differs_only_in_internal_section() {
    let args = |m: &'static str| ["apply", "--scheme", "ot-emission", "--mode", m];
    let opt = stdout(&ormtx(&[&args("optimise")[..], &[&f("olympics-b.schema")]].concat()));
    let enr = stdout(&ormtx(&[&args("enrich")[..], &[&f("olympics-b.schema")]].concat()));
    let strip = |s: &str| {
        let mut out = Vec::new();
        let mut skip = false;
        for l in s.lines() {
            if l == "INTERNAL" {
                skip = true;
                continue;
            }
            if skip && l.starts_with("  ") {
                continue;
            }
            skip = false;
            out.push(l.to_owned());
        }
        out
    };
    assert_ne!(opt, enr);
    assert!(!enr.contains("INTERNAL"));
    assert_eq!(strip(&opt), strip(&enr));
}

#[test]
fn apply_writes_out_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.schema");
    let o = ormtx(&[
        "apply",
        &f("olympics-b.schema"),
        "--scheme",
        "ot-emission",
        "--json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["ok"], true);
    assert_eq!(v["mode"], "optimise");
    assert_eq!(std::fs::read_to_string(out).unwrap(), v["schema"].as_str().unwrap());
}

#[test]
fn stale_parlist_is_an_instantiation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let bad = "OTEmission([Country, Quantity], [[won-gold-in-1, won-gold-in-2], [won-silver-in-1, won-silver-in-2], [won-bronze-in-1]], \
               [won-medals-of-in-1, won-medals-of-in-3], won-medals-of-in-2, MedalKind, MedalKind.code-1, MedalKind.code-2, code, char, ['G', 'S', 'B'])";
    let p = write(dir.path(), "stale.parlist", bad);
    let o = ormtx(&["apply", &f("olympics-b.schema"), "--scheme", "ot-emission", "--parlist", &p]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("arity"), "{}", stderr(&o));
}

#[test]
fn apply_refuses_existing_to_type() {
    let o = ormtx(&["apply", &f("olympics-a.schema"), "--scheme", "ot-emission"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("already in"), "{}", stderr(&o));
}

#[test]
fn check_equiv_on_olympics() {
    let o = ormtx(&["check", "--equiv", "--scheme", "ot-emission", "--context", &f("olympics-b.schema"), "--bounds", &f("olympics.bounds")]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("equivalence preserving (4225 from-side states, 4225 to-side states)"));
}

#[test]
fn check_distributivity() {
    let base = ["check", "--distrib", "--scheme", "ot-emission", "--context"];
    let o = ormtx(&[&base[..], &[&f("olympics-b.schema"), "--bounds", &f("olympics.bounds")]].concat());
    assert_eq!(code(&o), 0);
    let o = ormtx(&[&base[..], &[&f("olympics-b.schema"), "--bounds", &f("olympics.bounds"), "--strict-mu"]].concat());
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("counterexample for Minus"));
}

#[test]
fn check_stronger() {
    let o = ormtx(&["check", "--stronger", "--scheme", "strengthen-split", "--context", &f("car-driver.schema"), "--bounds", &f("car-driver.bounds")]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("strengthening"));

    let dir = tempfile::tempdir().unwrap();
    let split = dir.path().join("split.schema");
    let o = ormtx(&["apply", &f("car-driver.schema"), "--scheme", "strengthen-split", "--out", split.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = ormtx(&["check", "--stronger", &f("car-driver.schema"), split.to_str().unwrap(), "--bounds", &f("car-driver.bounds")]);
    assert_eq!(code(&o), 0);
    let first = format!("{} is stronger than {} (187 and 181 states)", split.display(), f("car-driver.schema"));
    assert!(stdout(&o).starts_with(&first), "{}", stdout(&o));
    assert!(stdout(&o).contains(&format!("valid in {} only", f("car-driver.schema"))));
    // The same schemas are not equivalent.
    let o = ormtx(&["check", "--equiv", &f("car-driver.schema"), split.to_str().unwrap(), "--bounds", &f("car-driver.bounds")]);
    assert_eq!(code(&o), 1);
}

#[test]
fn check_needs_inputs() {
    assert_eq!(code(&ormtx(&["check", "--equiv"])), 2);
    assert_eq!(code(&ormtx(&["check", &f("car-driver.schema"), &f("car-driver.schema")])), 2);
}

#[test]
fn enumerate_counts() {
    let dir = tempfile::tempdir().unwrap();
    let b = write(dir.path(), "one.bounds", "BOUNDS ; POOL Patient = 1 ; DOMAIN names = { 'a' } ; END");
    let o = ormtx(&["enumerate", &f("hospital-a.schema"), "--bounds", &b]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("5 valid populations of HospitalA"), "{}", stdout(&o));

    let o = ormtx(&["enumerate", &f("hospital-a.schema"), "--bounds", &b, "--json", "--list"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["count"], 5);
    assert_eq!(v["populations"].as_array().unwrap().len(), 5);

    let empty = write(dir.path(), "empty.schema", "SCHEMA Empty ; END");
    assert!(stdout(&ormtx(&["enumerate", &empty])).starts_with("1 valid populations"));

    let capped = write(dir.path(), "cap.bounds", "BOUNDS ; POOL Patient = 1 ; DOMAIN names = { 'a' } ; CAP = 1 ; END");
    let o = ormtx(&["enumerate", &f("hospital-a.schema"), "--bounds", &capped]);
    assert_eq!(code(&o), 3);
}

#[test]
fn invert_twice_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let once = dir.path().join("once.scheme");
    let twice = dir.path().join("twice.scheme");
    let thrice = dir.path().join("thrice.scheme");
    assert_eq!(code(&ormtx(&["invert", "--scheme", "ot-emission", "--out", once.to_str().unwrap()])), 0);
    assert_eq!(code(&ormtx(&["invert", "--scheme", once.to_str().unwrap(), "--out", twice.to_str().unwrap()])), 0);
    assert_eq!(code(&ormtx(&["invert", "--scheme", twice.to_str().unwrap(), "--out", thrice.to_str().unwrap()])), 0);
    let text = |p: &Path| std::fs::read_to_string(p).unwrap();
    assert_eq!(text(&once), text(&thrice));
    assert_ne!(text(&once), text(&twice));
}

#[test]
fn cleanup_command_reports_rounds() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write(
        dir.path(),
        "chain.schema",
        "SCHEMA Chain ; DOMAINS tag = { 'x' } ; OBJECT TYPES A ; VALUE TYPES Tag : tag ;
         RELATIONSHIP TYPES h = [ A : h-1 ] ; f = [ A : f-1, Tag : f-2 ] ; k = [ A : k-1 ] ;
         INTERNAL f, Tag ;
         DERIVATION RULES f = PROJ[f-1=h-1, f-2='x'] h ; k = PROJ[k-1=f-1] f ;
         UPDATE RULES f = PROJ[f-1=h-1, f-2='x'] h ; END",
    );
    let o = ormtx(&["cleanup", &chain, "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["steps"].as_array().unwrap().len(), 2);
    assert!(!v["schema"].as_str().unwrap().contains("Tag"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&ormtx(&[])), 2);
    assert_eq!(code(&ormtx(&["apply", &f("olympics-b.schema"), "--scheme", "ot-emission", "--mode", "merge"])), 2);
    assert_eq!(code(&ormtx(&["--version"])), 0);
}
