//! JSON reports. Every report carries `format_version`.

use std::collections::BTreeMap;

use serde::Serialize;

use ormtx_core::bounds::Bounds;
use ormtx_core::equivalence::{BijectionReport, Comparison, DistribReport};
use ormtx_core::schema::AxiomReport;
use ormtx_core::transform::{ApplicabilityReport, CleanupTrace, ReduceAction};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct BoundsJson {
    pub domains: BTreeMap<String, Vec<String>>,
    pub pools: BTreeMap<String, usize>,
    pub cap: u64,
}

impl From<&Bounds> for BoundsJson {
    fn from(b: &Bounds) -> Self {
        BoundsJson {
            domains: b.domains.iter().map(|(k, vs)| (k.clone(), vs.iter().map(|v| v.to_string()).collect())).collect(),
            pools: b.pools.iter().map(|(t, k)| (t.to_string(), *k)).collect(),
            cap: b.cap,
        }
    }
}

#[derive(Serialize)]
pub struct AxiomJson {
    pub name: &'static str,
    pub passed: bool,
    pub witnesses: Vec<String>,
}

#[derive(Serialize)]
pub struct ValidateReport {
    pub format_version: u32,
    pub schema: String,
    pub ok: bool,
    pub axioms: Vec<AxiomJson>,
}

impl ValidateReport {
    pub fn new(schema: &str, rep: &AxiomReport) -> Self {
        ValidateReport {
            format_version: FORMAT_VERSION,
            schema: schema.to_owned(),
            ok: rep.ok(),
            axioms: rep
                .checks
                .iter()
                .map(|c| AxiomJson { name: c.name, passed: c.passed(), witnesses: c.witnesses.clone() })
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct ReductionJson {
    pub constraint: String,
    pub action: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Serialize)]
pub struct StepJson {
    pub removed: Vec<String>,
    pub unconnected: Vec<String>,
    pub retained: Vec<String>,
    pub reductions: Vec<ReductionJson>,
    pub removed_domains: Vec<String>,
}

fn names<T: ToString>(xs: impl IntoIterator<Item = T>) -> Vec<String> {
    xs.into_iter().map(|x| x.to_string()).collect()
}

pub fn trace_json(t: &CleanupTrace) -> Vec<StepJson> {
    t.steps
        .iter()
        .map(|s| StepJson {
            removed: names(&s.removed),
            unconnected: names(&s.unconnected),
            retained: names(&s.retained),
            reductions: s
                .reductions
                .iter()
                .map(|r| {
                    let (action, detail) = match &r.action {
                        ReduceAction::Dropped => ("dropped", None),
                        ReduceAction::Rewritten(k) => ("rewritten", Some(k.to_string())),
                        ReduceAction::Derivable { states } => ("derivable", Some(format!("holds in {states} states"))),
                        ReduceAction::Retained => ("retained", None),
                    };
                    ReductionJson { constraint: r.constraint.to_string(), action, detail }
                })
                .collect(),
            removed_domains: s.removed_domains.iter().cloned().collect(),
        })
        .collect()
}

#[derive(Serialize)]
pub struct ApplicabilityJson {
    pub ok: bool,
    pub from_problems: Vec<String>,
    pub to_problems: Vec<String>,
    pub rematerialised: Vec<String>,
}

impl From<&ApplicabilityReport> for ApplicabilityJson {
    fn from(r: &ApplicabilityReport) -> Self {
        ApplicabilityJson {
            ok: r.ok(),
            from_problems: r.from_problems.clone(),
            to_problems: r.to_problems.clone(),
            rematerialised: names(&r.rematerialised),
        }
    }
}

#[derive(Serialize)]
pub struct ApplyReport {
    pub format_version: u32,
    pub scheme: String,
    pub mode: String,
    pub ok: bool,
    pub applicability: ApplicabilityJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub cleanup: Vec<StepJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
}

#[derive(Serialize)]
pub struct CleanupReport {
    pub format_version: u32,
    pub steps: Vec<StepJson>,
    pub schema: String,
}

#[derive(Serialize)]
pub struct ComparisonJson {
    pub verdict: String,
    pub vocabulary: Vec<String>,
    pub left_states: usize,
    pub right_states: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub only_left: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub only_right: Option<String>,
}

impl From<&Comparison> for ComparisonJson {
    fn from(c: &Comparison) -> Self {
        ComparisonJson {
            verdict: c.verdict.to_string(),
            vocabulary: names(&c.vocabulary),
            left_states: c.left,
            right_states: c.right,
            only_left: c.only_left.as_ref().map(|p| p.to_string()),
            only_right: c.only_right.as_ref().map(|p| p.to_string()),
        }
    }
}

#[derive(Serialize)]
pub struct BijectionJson {
    pub holds: bool,
    pub from_states: usize,
    pub to_states: usize,
    pub images_valid: bool,
    pub injective: bool,
    pub surjective: bool,
    pub inverse: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

impl From<&BijectionReport> for BijectionJson {
    fn from(b: &BijectionReport) -> Self {
        BijectionJson {
            holds: b.holds(),
            from_states: b.from_states,
            to_states: b.to_states,
            images_valid: b.images_valid,
            injective: b.injective,
            surjective: b.surjective,
            inverse: b.inverse,
            counterexample: b.counterexample.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct DistribCounterexampleJson {
    pub op: String,
    pub p: String,
    pub x: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Serialize)]
pub struct DistribJson {
    pub holds: bool,
    pub strict_mu: bool,
    pub states: usize,
    pub union_pairs: u64,
    pub minus_pairs: u64,
    pub skipped: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<DistribCounterexampleJson>,
}

impl DistribJson {
    pub fn new(d: &DistribReport, strict_mu: bool) -> Self {
        DistribJson {
            holds: d.holds(),
            strict_mu,
            states: d.states,
            union_pairs: d.union_pairs,
            minus_pairs: d.minus_pairs,
            skipped: d.skipped,
            counterexample: d.counterexample.as_ref().map(|c| DistribCounterexampleJson {
                op: format!("{:?}", c.op).to_lowercase(),
                p: c.p.to_string(),
                x: c.x.to_string(),
                lhs: c.lhs.to_string(),
                rhs: c.rhs.to_string(),
            }),
        }
    }
}

#[derive(Serialize)]
pub struct CheckReport {
    pub format_version: u32,
    pub check: &'static str,
    pub holds: bool,
    pub bounds: BoundsJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub property: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bijection: Option<BijectionJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distributivity: Option<DistribJson>,
}

#[derive(Serialize)]
pub struct EnumerateReport {
    pub format_version: u32,
    pub schema: String,
    pub bounds: BoundsJson,
    pub count: usize,
    pub visited: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub populations: Option<Vec<String>>,
}

#[derive(Serialize)]
pub struct ErrorReport {
    pub format_version: u32,
    pub error: String,
    pub exit_code: i32,
}
