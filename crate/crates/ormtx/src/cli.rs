//! The `ormtx` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ormtx_core::bounds::Bounds;
use ormtx_core::equivalence::{
    check_bijection, check_direct_equivalence, check_instance_property, check_update_distributivity, enumerate_state_space,
    EquivError, MuScope, SchemeProperty, Verdict,
};
use ormtx_core::schema::{serialize_schema, validate};
use ormtx_core::scheme::{instantiate, invert, InstantiatedTransformation, SchemeError};
use ormtx_core::transform::{apply, check_applicability, cleanup, ApplyOptions, CleanupOptions, Mode, PiVariant, TransformError};
use ormtx_core::Schema;

use crate::io::{read_bounds, read_parlist, read_scheme, read_schema, write_text, InputError};
use crate::library::SCHEMES;
use crate::report::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ormtx", version, about = "Transform and compare ORM schemas")]
pub struct Cli {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the main output (a schema or a scheme) to this file.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SchemeArgs {
    /// Shipped scheme name or scheme file.
    #[arg(long)]
    pub scheme: String,
    /// Parameter list file. Shipped schemes default to their sample list.
    #[arg(long, value_name = "FILE")]
    pub parlist: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CleanupArgs {
    /// Protect types that have supertypes instead of types that have subtypes.
    #[arg(long)]
    pub pi_literal: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the schema axioms.
    Validate { schema: PathBuf },
    /// Apply a transformation scheme to a schema.
    Apply {
        schema: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value = "optimise")]
        mode: Mode,
        /// Bounds for the derivability check on constraints of removed types.
        #[arg(long, value_name = "FILE")]
        bounds: Option<PathBuf>,
        /// Let To types that are derived in the schema become stored again.
        #[arg(long)]
        rematerialise: bool,
        #[command(flatten)]
        cleanup: CleanupArgs,
    },
    /// Print the inverse of a scheme, or of its instantiation when a
    /// parameter list is given.
    Invert {
        #[arg(long)]
        scheme: String,
        #[arg(long, value_name = "FILE")]
        parlist: Option<PathBuf>,
        /// Schema used to name relationship types while instantiating.
        #[arg(long, value_name = "FILE")]
        context: Option<PathBuf>,
    },
    /// Run CleanUp on a schema.
    Cleanup {
        schema: PathBuf,
        #[arg(long, value_name = "FILE")]
        bounds: Option<PathBuf>,
        #[command(flatten)]
        cleanup: CleanupArgs,
    },
    /// Compare schemas or check a transformation at bounds.
    Check(CheckArgs),
    /// Count, and optionally list, the valid populations of a schema.
    Enumerate {
        schema: PathBuf,
        #[arg(long, value_name = "FILE")]
        bounds: Option<PathBuf>,
        /// List every population.
        #[arg(long)]
        list: bool,
    },
    /// List the shipped schemes, or print one.
    Schemes { name: Option<String> },
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("what").required(true).args(["equiv", "stronger", "distrib"]))]
pub struct CheckArgs {
    /// Two schemas are equivalent, or the scheme preserves equivalence.
    #[arg(long)]
    pub equiv: bool,
    /// One schema is stronger, or the scheme strengthens.
    #[arg(long)]
    pub stronger: bool,
    /// The update rules distribute over union and difference.
    #[arg(long)]
    pub distrib: bool,
    /// Include constant update rules in the update mapping.
    #[arg(long)]
    pub strict_mu: bool,
    #[arg(long, value_name = "FILE")]
    pub bounds: Option<PathBuf>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub parlist: Option<PathBuf>,
    /// Schema the instantiated scheme is checked against.
    #[arg(long, value_name = "FILE")]
    pub context: Option<PathBuf>,
    /// Schemas to compare.
    pub schemas: Vec<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Scheme(SchemeError),
    #[error(transparent)]
    Transform(TransformError),
    #[error(transparent)]
    Equiv(EquivError),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Scheme(SchemeError::Parse(_)) => EXIT_INPUT,
            Failure::Scheme(_) => EXIT_FAILS,
            Failure::Transform(TransformError::Equiv(e)) | Failure::Equiv(e) => equiv_code(e),
            Failure::Transform(TransformError::Eval(_)) => EXIT_INPUT,
            Failure::Transform(TransformError::Scheme(SchemeError::Parse(_))) => EXIT_INPUT,
            Failure::Transform(_) => EXIT_FAILS,
        }
    }
}

fn equiv_code(e: &EquivError) -> i32 {
    match e {
        EquivError::SpaceExceeded { .. } => EXIT_CAP,
        EquivError::Scheme(SchemeError::Parse(_)) | EquivError::Eval(_) | EquivError::Unsupported(_) => EXIT_INPUT,
        EquivError::VocabularyMismatch { .. } => EXIT_INPUT,
        EquivError::Scheme(_) => EXIT_FAILS,
    }
}

impl From<SchemeError> for Failure {
    fn from(e: SchemeError) -> Self {
        Failure::Scheme(e)
    }
}

impl From<TransformError> for Failure {
    fn from(e: TransformError) -> Self {
        Failure::Transform(e)
    }
}

impl From<EquivError> for Failure {
    fn from(e: EquivError) -> Self {
        Failure::Equiv(e)
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    json: bool,
    file: Option<PathBuf>,
}

impl Io<'_> {
    fn json<T: Serialize>(&mut self, v: &T) {
        let _ = writeln!(self.out, "{}", serde_json::to_string_pretty(v).expect("reports serialise"));
    }

    fn line(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.out, "{}", s.as_ref());
    }

    fn note(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.err, "{}", s.as_ref());
    }

    /// The main artefact goes to `--out` when given, else to stdout in
    /// text mode.
    fn emit(&mut self, text: &str) -> Result<(), Failure> {
        match &self.file {
            Some(p) => write_text(p, text)?,
            None if !self.json => {
                let _ = write!(self.out, "{text}");
            }
            None => {}
        }
        Ok(())
    }
}

fn bounds_or_default(p: &Option<PathBuf>) -> Result<Bounds, Failure> {
    Ok(match p {
        Some(p) => read_bounds(p)?,
        None => Bounds::default(),
    })
}

fn cleanup_opts(c: &CleanupArgs, bounds: Option<Bounds>) -> CleanupOptions {
    CleanupOptions { pi: if c.pi_literal { PiVariant::HasSupertypes } else { PiVariant::HasSubtypes }, bounds }
}

fn instance(scheme: &str, parlist: &Option<PathBuf>, context: Option<&Schema>) -> Result<InstantiatedTransformation, Failure> {
    let loaded = read_scheme(scheme)?;
    let list = match (parlist, loaded.example) {
        (Some(p), _) => read_parlist(p)?,
        (None, Some(x)) => x,
        (None, None) => return Err(InputError::Usage(format!("`{scheme}` needs --parlist")).into()),
    };
    Ok(instantiate(&loaded.scheme, &list, context)?)
}

/// Parses `args` and runs the command. Returns the exit code.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            code
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut io = Io { out, err, json: cli.json, file: cli.out.clone() };
    match dispatch(cli.command, &mut io) {
        Ok(code) => code,
        Err(f) => {
            let code = f.code();
            if io.json {
                io.json(&ErrorReport { format_version: FORMAT_VERSION, error: f.to_string(), exit_code: code });
            } else {
                io.note(format!("error: {f}"));
            }
            code
        }
    }
}

fn dispatch(cmd: Command, io: &mut Io<'_>) -> Result<i32, Failure> {
    match cmd {
        Command::Validate { schema } => cmd_validate(&schema, io),
        Command::Apply { schema, scheme, mode, bounds, rematerialise, cleanup } => {
            cmd_apply(&schema, &scheme, mode, &bounds, rematerialise, &cleanup, io)
        }
        Command::Invert { scheme, parlist, context } => cmd_invert(&scheme, &parlist, &context, io),
        Command::Cleanup { schema, bounds, cleanup } => cmd_cleanup(&schema, &bounds, &cleanup, io),
        Command::Check(args) => cmd_check(&args, io),
        Command::Enumerate { schema, bounds, list } => cmd_enumerate(&schema, &bounds, list, io),
        Command::Schemes { name } => cmd_schemes(name.as_deref(), io),
    }
}

fn cmd_validate(path: &Path, io: &mut Io<'_>) -> Result<i32, Failure> {
    let s = read_schema(path)?;
    let rep = validate(&s);
    if io.json {
        io.json(&ValidateReport::new(&s.name, &rep));
    } else {
        for c in &rep.checks {
            io.line(format!("{:<36} {}", c.name, if c.passed() { "pass" } else { "FAIL" }));
            for w in &c.witnesses {
                io.line(format!("    {w}"));
            }
        }
        io.line(if rep.ok() { format!("{}: all axioms hold", s.name) } else { format!("{}: axioms violated", s.name) });
    }
    Ok(if rep.ok() { EXIT_OK } else { EXIT_FAILS })
}

fn cmd_apply(
    path: &Path,
    sa: &SchemeArgs,
    mode: Mode,
    bounds: &Option<PathBuf>,
    rematerialise: bool,
    c: &CleanupArgs,
    io: &mut Io<'_>,
) -> Result<i32, Failure> {
    let s = read_schema(path)?;
    let inst = instance(&sa.scheme, &sa.parlist, Some(&s))?;
    let b = bounds.as_ref().map(|p| read_bounds(p)).transpose()?;
    let opts = ApplyOptions { cleanup: cleanup_opts(c, b), rematerialise };
    let applicability = check_applicability(&inst, &s, rematerialise);
    let result = apply(&inst, &s, mode, &opts);
    let (code, error) = match &result {
        Ok(_) => (EXIT_OK, None),
        Err(TransformError::Equiv(e)) => (equiv_code(e), Some(result.as_ref().unwrap_err().to_string())),
        Err(e @ (TransformError::NotApplicable(_) | TransformError::ConstraintClash(_) | TransformError::InvalidResult(_))) => {
            (EXIT_FAILS, Some(e.to_string()))
        }
        Err(_) => return Err(result.unwrap_err().into()),
    };
    let text = result.as_ref().ok().map(|a| serialize_schema(&a.schema));
    if io.json {
        io.json(&ApplyReport {
            format_version: FORMAT_VERSION,
            scheme: inst.name.clone(),
            mode: mode.to_string(),
            ok: code == EXIT_OK,
            applicability: (&applicability).into(),
            error: error.clone(),
            cleanup: result.as_ref().map(|a| trace_json(&a.trace)).unwrap_or_default(),
            schema: text.clone(),
        });
    }
    match (&result, text) {
        (Ok(a), Some(t)) => {
            io.emit(&t)?;
            if !io.json {
                if !a.trace.steps.iter().any(|s| s.changed()) {
                    io.note("cleanup: nothing to remove");
                }
                for (i, st) in a.trace.steps.iter().filter(|s| s.changed()).enumerate() {
                    let gone: Vec<String> = st.removed.iter().chain(&st.unconnected).map(|t| t.to_string()).collect();
                    io.note(format!("cleanup step {}: removed {{{}}}", i + 1, gone.join(", ")));
                    for r in &st.reductions {
                        io.note(format!("  {} -> {:?}", r.constraint, r.action));
                    }
                }
            }
        }
        _ => {
            if !io.json {
                io.note(format!("error: {}", error.unwrap_or_default()));
            }
        }
    }
    Ok(code)
}

fn cmd_invert(scheme: &str, parlist: &Option<PathBuf>, context: &Option<PathBuf>, io: &mut Io<'_>) -> Result<i32, Failure> {
    let ctx = context.as_ref().map(|p| read_schema(p)).transpose()?;
    let text = if parlist.is_some() || context.is_some() {
        invert(&instance(scheme, parlist, ctx.as_ref())?)?.to_string()
    } else {
        read_scheme(scheme)?.scheme.inverted().to_text()
    };
    if io.json {
        io.json(&serde_json::json!({ "format_version": FORMAT_VERSION, "inverse": text }));
    }
    io.emit(&text)?;
    Ok(EXIT_OK)
}

fn cmd_cleanup(path: &Path, bounds: &Option<PathBuf>, c: &CleanupArgs, io: &mut Io<'_>) -> Result<i32, Failure> {
    let s = read_schema(path)?;
    let b = bounds.as_ref().map(|p| read_bounds(p)).transpose()?;
    let (out, trace) = cleanup(&s, &cleanup_opts(c, b))?;
    let text = serialize_schema(&out);
    if io.json {
        io.json(&CleanupReport { format_version: FORMAT_VERSION, steps: trace_json(&trace), schema: text.clone() });
    } else {
        let n = trace.steps.iter().filter(|s| s.changed()).count();
        io.note(format!("{n} cleanup step(s), removed {{{}}}", trace.removed().iter().map(|t| t.as_str()).collect::<Vec<_>>().join(", ")));
    }
    io.emit(&text)?;
    Ok(EXIT_OK)
}

fn describe_bounds(b: &Bounds) -> String {
    let mut parts: Vec<String> = b.pools.iter().map(|(t, k)| format!("pool {t}={k}")).collect();
    parts.extend(b.domains.iter().map(|(d, vs)| {
        format!("{d}={{{}}}", vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
    }));
    parts.push(format!("cap {}", b.cap));
    parts.join(", ")
}

fn cmd_check(a: &CheckArgs, io: &mut Io<'_>) -> Result<i32, Failure> {
    let b = bounds_or_default(&a.bounds)?;
    let what = if a.equiv { "equiv" } else if a.stronger { "stronger" } else { "distrib" };
    let mut rep = CheckReport {
        format_version: FORMAT_VERSION,
        check: what,
        holds: false,
        bounds: (&b).into(),
        property: None,
        comparison: None,
        bijection: None,
        distributivity: None,
    };
    let mut lines = Vec::new();
    if let Some(scheme) = &a.scheme {
        if !a.schemas.is_empty() {
            return Err(InputError::Usage("give either --scheme or two schemas".into()).into());
        }
        let ctx = a.context.as_ref().map(|p| read_schema(p)).transpose()?;
        let inst = instance(scheme, &a.parlist, ctx.as_ref())?;
        if a.distrib {
            let scope = if a.strict_mu { MuScope::Strict } else { MuScope::Content };
            let d = check_update_distributivity(&inst, ctx.as_ref(), &b, scope)?;
            rep.holds = d.holds();
            lines.push(format!(
                "{} states, {} union pairs, {} difference pairs, {} pairs outside the state space",
                d.states, d.union_pairs, d.minus_pairs, d.skipped
            ));
            match &d.counterexample {
                None => lines.push("update rules distribute over union and difference".into()),
                Some(c) => {
                    lines.push(format!("counterexample for {:?}:", c.op));
                    lines.push(format!("  p = {}", c.p));
                    lines.push(format!("  x = {}", c.x));
                    lines.push(format!("  mu(p op x)     = {}", c.lhs));
                    lines.push(format!("  mu(p) op mu(x) = {}", c.rhs));
                }
            }
            rep.distributivity = Some(DistribJson::new(&d, a.strict_mu));
        } else {
            let p = check_instance_property(&inst, ctx.as_ref(), &b)?;
            rep.holds = match what {
                "equiv" => p.property == SchemeProperty::EquivalencePreserving,
                _ => p.property == SchemeProperty::Strengthening,
            };
            lines.push(format!("{}: {} ({} from-side states, {} to-side states)", inst.name, p.property, p.comparison.left, p.comparison.right));
            if let Some(w) = &p.comparison.only_left {
                lines.push(format!("valid on the from side only: {w}"));
            }
            if let Some(w) = &p.comparison.only_right {
                lines.push(format!("valid on the to side only: {w}"));
            }
            if p.property == SchemeProperty::EquivalencePreserving {
                let bij = check_bijection(&inst, ctx.as_ref(), &b)?;
                lines.push(format!("update mapping is {}a bijection inverted by the derivation rules", if bij.holds() { "" } else { "not " }));
                if let Some(c) = &bij.counterexample {
                    lines.push(format!("  {c}"));
                }
                rep.holds &= bij.holds();
                rep.bijection = Some((&bij).into());
            }
            rep.property = Some(p.property.to_string());
            rep.comparison = Some((&p.comparison).into());
        }
    } else {
        let [l, r] = a.schemas.as_slice() else {
            return Err(InputError::Usage("give two schemas or --scheme".into()).into());
        };
        if a.distrib {
            return Err(InputError::Usage("--distrib needs --scheme".into()).into());
        }
        let (s1, s2) = (read_schema(l)?, read_schema(r)?);
        let c = check_direct_equivalence(&s1, &s2, &b)?;
        let (n1, n2) = if s1.name == s2.name {
            (l.display().to_string(), r.display().to_string())
        } else {
            (s1.name.clone(), s2.name.clone())
        };
        rep.holds = match what {
            "equiv" => c.verdict == Verdict::Equivalent,
            _ => matches!(c.verdict, Verdict::S1Stronger | Verdict::S2Stronger),
        };
        let verdict = match c.verdict {
            Verdict::S1Stronger => format!("{n1} is stronger than {n2}"),
            Verdict::S2Stronger => format!("{n2} is stronger than {n1}"),
            v => format!("{v}"),
        };
        lines.push(format!("{verdict} ({} and {} states)", c.left, c.right));
        if let Some(w) = &c.only_left {
            lines.push(format!("valid in {n1} only: {w}"));
        }
        if let Some(w) = &c.only_right {
            lines.push(format!("valid in {n2} only: {w}"));
        }
        rep.comparison = Some((&c).into());
    }
    if io.json {
        io.json(&rep);
    } else {
        for l in lines {
            io.line(l);
        }
        io.line(format!("at bounds: {}", describe_bounds(&b)));
    }
    Ok(if rep.holds { EXIT_OK } else { EXIT_FAILS })
}

fn cmd_enumerate(path: &Path, bounds: &Option<PathBuf>, list: bool, io: &mut Io<'_>) -> Result<i32, Failure> {
    let s = read_schema(path)?;
    let b = bounds_or_default(bounds)?;
    let space = enumerate_state_space(&s, &b)?;
    let pops: Vec<String> = space.pops.iter().map(|p| p.to_string()).collect();
    if io.json {
        io.json(&EnumerateReport {
            format_version: FORMAT_VERSION,
            schema: s.name.clone(),
            bounds: (&b).into(),
            count: space.len(),
            visited: space.visited,
            populations: list.then_some(pops),
        });
    } else {
        if list {
            for p in &pops {
                io.line(p);
            }
        }
        io.line(format!("{} valid populations of {} at bounds: {}", space.len(), s.name, describe_bounds(&b)));
    }
    Ok(EXIT_OK)
}

fn cmd_schemes(name: Option<&str>, io: &mut Io<'_>) -> Result<i32, Failure> {
    match name {
        Some(n) => {
            let e = crate::library::entry(n).ok_or_else(|| InputError::UnknownScheme(n.to_owned()))?;
            if io.json {
                io.json(&serde_json::json!({ "format_version": FORMAT_VERSION, "name": e.name, "text": e.text, "example": e.example }));
            }
            io.emit(e.text)?;
        }
        None if io.json => {
            let list: Vec<_> = SCHEMES
                .iter()
                .map(|e| serde_json::json!({ "name": e.name, "summary": e.summary, "strengthening": e.strengthening }))
                .collect();
            io.json(&serde_json::json!({ "format_version": FORMAT_VERSION, "schemes": list }));
        }
        None => {
            for e in SCHEMES {
                let tag = if e.strengthening { " (strengthening)" } else { "" };
                io.line(format!("{:<24} {}{tag}", e.name, e.summary));
            }
        }
    }
    Ok(EXIT_OK)
}
