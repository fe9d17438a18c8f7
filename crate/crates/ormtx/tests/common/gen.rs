//! Random schemas for the property checks.

use std::collections::BTreeSet;
use std::fmt::Write;

use proptest::prelude::*;
use proptest::sample::Index;

use ormtx_core::schema::parse_schema;
use ormtx_core::{Constraint, ConstraintKind, Schema};

#[derive(Clone, Debug)]
pub struct Shape {
    entities: usize,
    rels: Vec<(bool, usize, usize)>,
    subs: Vec<bool>,
    internal: Vec<bool>,
    der: Vec<Option<Index>>,
    upd: Vec<Option<Index>>,
    unique: Vec<bool>,
}

fn roles(k: usize, binary: bool) -> Vec<String> {
    if binary { vec![format!("R{k}-1"), format!("R{k}-2")] } else { vec![format!("R{k}-1")] }
}

fn copy_rule(k: usize, j: usize, binary: bool) -> String {
    let bind: Vec<String> = roles(k, binary).iter().zip(roles(j, binary)).map(|(a, b)| format!("{a}={b}")).collect();
    format!("  R{k} = PROJ[{}] R{j} ;\n", bind.join(", "))
}

impl Shape {
    /// Earlier relationship types of the same arity; rules only point
    /// backwards so substitution always terminates.
    fn sources(&self, k: usize) -> Vec<usize> {
        (0..k).filter(|&j| self.rels[j].0 == self.rels[k].0).collect()
    }

    pub fn render(&self) -> String {
        let n = self.entities;
        let mut sub: BTreeSet<(usize, usize)> = BTreeSet::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.subs[i * n + j] {
                    sub.insert((i, j));
                }
            }
        }
        loop {
            let extra: Vec<_> = sub
                .iter()
                .flat_map(|&(a, b)| sub.iter().filter(move |&&(c, _)| c == b).map(move |&(_, d)| (a, d)))
                .filter(|p| !sub.contains(p))
                .collect();
            if extra.is_empty() {
                break;
            }
            sub.extend(extra);
        }
        let ents: Vec<String> = (0..n).map(|i| format!("E{i}")).collect();
        let mut s = format!("SCHEMA Gen ;\nOBJECT TYPES\n  {} ;\n", ents.join(", "));
        if !sub.is_empty() {
            s.push_str("SUBTYPES\n");
            for (a, b) in &sub {
                let _ = writeln!(s, "  E{a} < E{b} ;");
            }
        }
        s.push_str("RELATIONSHIP TYPES\n");
        for (k, &(binary, p, q)) in self.rels.iter().enumerate() {
            if binary {
                let _ = writeln!(s, "  R{k} = [ E{p} : R{k}-1, E{q} : R{k}-2 ] ;");
            } else {
                let _ = writeln!(s, "  R{k} = [ E{p} : R{k}-1 ] ;");
            }
        }
        let mut internal: Vec<String> = Vec::new();
        for (i, on) in self.internal.iter().enumerate() {
            if *on {
                internal.push(if i < n { format!("E{i}") } else { format!("R{}", i - n) });
            }
        }
        if !internal.is_empty() {
            let _ = writeln!(s, "INTERNAL\n  {} ;", internal.join(", "));
        }
        let uniques: Vec<usize> = (0..self.rels.len()).filter(|&k| self.unique[k]).collect();
        if !uniques.is_empty() {
            s.push_str("CONSTRAINTS\n");
            for k in uniques {
                let _ = writeln!(s, "  u{k} : UNIQUE {{ R{k}-1 }} ;");
            }
        }
        for (title, picks) in [("DERIVATION RULES", &self.der), ("UPDATE RULES", &self.upd)] {
            let mut body = String::new();
            for (k, pick) in picks.iter().enumerate() {
                let src = self.sources(k);
                if let (Some(ix), false) = (pick, src.is_empty()) {
                    body.push_str(&copy_rule(k, src[ix.index(src.len())], self.rels[k].0));
                }
            }
            if !body.is_empty() {
                let _ = write!(s, "{title}\n{body}");
            }
        }
        s.push_str("END\n");
        s
    }

    pub fn schema(&self) -> Schema {
        let text = self.render();
        parse_schema(&text).unwrap_or_else(|e| panic!("{e}\n{text}"))
    }
}

/// Small schemas with subtyping, internal types and copy rules.
pub fn cleanup_shape() -> impl Strategy<Value = Shape> {
    (1usize..=4, 1usize..=5).prop_flat_map(|(n, r)| {
        (
            prop::collection::vec((any::<bool>(), 0..n, 0..n), r),
            prop::collection::vec(prop::bool::weighted(0.3), n * n),
            prop::collection::vec(prop::bool::weighted(0.6), n + r),
            prop::collection::vec(prop::option::weighted(0.6, any::<Index>()), r),
            prop::collection::vec(prop::option::weighted(0.6, any::<Index>()), r),
            prop::collection::vec(any::<bool>(), r),
        )
            .prop_map(move |(rels, subs, internal, der, upd, unique)| Shape { entities: n, rels, subs, internal, der, upd, unique })
    })
}

/// Constraint choices over `f = [A, B]` and `g = [A, B]`, each with two
/// spellings of the same condition.
#[derive(Clone, Debug)]
pub struct PairShape {
    with_g: bool,
    unique_f: Option<bool>,
    mandatory_f: bool,
    link: Option<(bool, bool)>,
    unique_g: Option<bool>,
}

impl PairShape {
    fn render(&self, second: bool) -> String {
        let mut ks: Vec<String> = Vec::new();
        let alt = |b: bool| b ^ second;
        if let Some(a) = self.unique_f {
            ks.push(if alt(a) { "UNIQUE { f-1 }".into() } else { "FREQUENCY f-1 1..1".into() });
        }
        if self.mandatory_f {
            ks.push("MANDATORY { f-1 }".into());
        }
        if self.with_g {
            if let Some(a) = self.unique_g {
                ks.push(if alt(a) { "UNIQUE { g-2 }".into() } else { "FREQUENCY g-2 1..1".into() });
            }
            match self.link {
                Some((true, a)) if alt(a) => ks.push("EQUALITY (f-1 = g-1)".into()),
                Some((true, _)) => {
                    ks.push("SUBSET (f-1 -> g-1)".into());
                    ks.push("SUBSET (g-1 -> f-1)".into());
                }
                Some((false, a)) if alt(a) => ks.push("EXCLUSION { f-1 } { g-1 }".into()),
                Some((false, _)) => ks.push("EXCLUSION { g-1 } { f-1 }".into()),
                None => {}
            }
        }
        if second {
            ks.reverse();
        }
        let tag = if second { "b" } else { "a" };
        let mut s = format!("SCHEMA Pair{} ;\nOBJECT TYPES\n  A, B ;\nRELATIONSHIP TYPES\n  f = [ A : f-1, B : f-2 ] ;\n", tag.to_uppercase());
        if self.with_g {
            s.push_str("  g = [ A : g-1, B : g-2 ] ;\n");
        }
        if !ks.is_empty() {
            s.push_str("CONSTRAINTS\n");
            for (i, k) in ks.iter().enumerate() {
                let _ = writeln!(s, "  {tag}{i} : {k} ;");
            }
        }
        s.push_str("END\n");
        s
    }

    pub fn pair(&self) -> (Schema, Schema) {
        let p = |t: String| parse_schema(&t).unwrap_or_else(|e| panic!("{e}\n{t}"));
        (p(self.render(false)), p(self.render(true)))
    }
}

pub fn pair_shape() -> impl Strategy<Value = PairShape> {
    (any::<bool>(), prop::option::of(any::<bool>()), any::<bool>(), prop::option::of((any::<bool>(), any::<bool>())), prop::option::of(any::<bool>()))
        .prop_map(|(with_g, unique_f, mandatory_f, link, unique_g)| PairShape { with_g, unique_f, mandatory_f, link, unique_g })
}

/// Adds `z = [A : z-1, B : z-2]` with a uniqueness constraint on `z-1`.
pub fn with_fresh(s: &Schema) -> Schema {
    let mut out = s.clone();
    out.universe.relationship_types.insert("z".into(), vec!["z-1".into(), "z-2".into()]);
    out.universe.player.insert("z-1".into(), "A".into());
    out.universe.player.insert("z-2".into(), "B".into());
    out.constraints.push(Constraint::new("kz", ConstraintKind::Unique(vec!["z-1".into()])));
    out
}
