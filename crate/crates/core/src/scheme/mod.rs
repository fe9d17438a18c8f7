//! Transformation schemes: parameterised templates with arity notation,
//! their instantiation and their inversion.
//!
//! ```text
//! Transformation schema Name (x!n, (r!n)!m, t, i!m);
//!   Object types:       x!n, ...;
//!   Value types:        l: d;
//!   Relationship types: (f = [(x:r)!n])!m, ...;
//!   Constraints:        c1: UNIQUE {u}; ...
//!   From:               f!m;
//!   To:                 ...;
//!   Derivation rules:   (f = ...)!m;
//!   Update rules:       g = UNION OF (...)!m;
//! End Transformation schema.
//! ```

mod instance;
mod parlist;
mod template;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::ParseError;
use crate::lex::{tokenize, Punct, Tok, Token};
use template::{build, visit_idents, write_nodes, Node};

pub use instance::{instantiate, invert, Fragment, InstantiatedTransformation, SymbolBinding};
pub use parlist::{parse_parlist, ParList, ParValue};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SchemeError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("arity notation: {0}")]
    ArityNotation(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("partial instantiation: {0}")]
    Partial(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("cannot name relationship type: {0}")]
    Naming(String),
    #[error("transformation has no {0} rules and cannot be inverted")]
    MissingRules(&'static str),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    Vector(String),
    /// `(r!inner)!outer`; element `r_{i,j}` has `i` ranging over `inner`.
    Matrix { inner: String, outer: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub shape: Shape,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Section {
    ObjectTypes,
    ValueTypes,
    RelationshipTypes,
    Constraints,
    From,
    To,
    DerivationRules,
    UpdateRules,
}

impl Section {
    pub const ALL: [Section; 8] = [
        Section::ObjectTypes,
        Section::ValueTypes,
        Section::RelationshipTypes,
        Section::Constraints,
        Section::From,
        Section::To,
        Section::DerivationRules,
        Section::UpdateRules,
    ];

    fn words(self) -> &'static [&'static str] {
        match self {
            Section::ObjectTypes => &["Object", "types"],
            Section::ValueTypes => &["Value", "types"],
            Section::RelationshipTypes => &["Relationship", "types"],
            Section::Constraints => &["Constraints"],
            Section::From => &["From"],
            Section::To => &["To"],
            Section::DerivationRules => &["Derivation", "rules"],
            Section::UpdateRules => &["Update", "rules"],
        }
    }

    fn title(self) -> String {
        self.words().join(" ")
    }
}

const KEYWORDS: [&str; 18] = [
    "UNIQUE", "MANDATORY", "EXTUNIQUE", "EACH", "IS", "IN", "FREQUENCY", "EXCLUSION", "SUBSET", "EQUALITY",
    "CARDINALITY", "PROJ", "SEL", "JOIN", "UNION", "OF", "Val", "UNBOUNDED",
];

/// A parsed transformation scheme.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformationScheme {
    pub name: String,
    pub params: Vec<Param>,
    pub sections: BTreeMap<Section, Vec<Node>>,
}

fn is_word(t: Option<&Token>, w: &str) -> bool {
    matches!(t.map(|t| &t.tok), Some(Tok::Ident(s)) if s.eq_ignore_ascii_case(w))
}

fn header_at(toks: &[Token], i: usize) -> Option<(Section, usize)> {
    for s in Section::ALL {
        let w = s.words();
        if w.iter().enumerate().all(|(k, w)| is_word(toks.get(i + k), w))
            && matches!(toks.get(i + w.len()).map(|t| &t.tok), Some(Tok::Punct(Punct::Colon)))
        {
            return Some((s, w.len() + 1));
        }
    }
    None
}

fn syntax_at(toks: &[Token], i: usize, msg: &str) -> SchemeError {
    let t = toks.get(i).or_else(|| toks.last());
    let (line, col) = t.map(|t| (t.line, t.col)).unwrap_or((1, 1));
    SchemeError::Parse(ParseError::Syntax { line, col, msg: msg.to_string() })
}

fn params_from(nodes: &[Node]) -> Result<Vec<Param>, SchemeError> {
    let mut out = Vec::new();
    for item in nodes.split(|n| matches!(n, Node::Tok(Token { tok: Tok::Punct(Punct::Comma), .. }))) {
        let ident = |n: &Node| match n {
            Node::Tok(Token { tok: Tok::Ident(s), .. }) => Some(s.clone()),
            _ => None,
        };
        let p = match item {
            [n] if ident(n).is_some() => Param { name: ident(n).unwrap(), shape: Shape::Scalar },
            [Node::Repeat { body, var, .. }] => match body.as_slice() {
                [n] if ident(n).is_some() => Param { name: ident(n).unwrap(), shape: Shape::Vector(var.clone()) },
                [Node::Repeat { body: inner, var: iv, .. }] => match inner.as_slice() {
                    [n] if ident(n).is_some() => Param {
                        name: ident(n).unwrap(),
                        shape: Shape::Matrix { inner: iv.clone(), outer: var.clone() },
                    },
                    _ => return Err(SchemeError::ArityNotation("parameters nest at most two levels".into())),
                },
                _ => return Err(SchemeError::ArityNotation("malformed parameter".into())),
            },
            _ => return Err(SchemeError::ArityNotation("malformed parameter".into())),
        };
        if out.iter().any(|q: &Param| q.name == p.name) {
            return Err(SchemeError::DuplicateName(p.name));
        }
        out.push(p);
    }
    Ok(out)
}

pub fn parse_scheme(src: &str) -> Result<TransformationScheme, SchemeError> {
    let toks = tokenize(src)?;
    let mut i = 0;
    if !(is_word(toks.get(0), "Transformation") && is_word(toks.get(1), "schema")) {
        return Err(syntax_at(&toks, 0, "expected `Transformation schema`"));
    }
    i += 2;
    let name = match toks.get(i).map(|t| &t.tok) {
        Some(Tok::Ident(s)) => s.clone(),
        _ => return Err(syntax_at(&toks, i, "expected scheme name")),
    };
    i += 1;
    let mut params = Vec::new();
    if matches!(toks.get(i).map(|t| &t.tok), Some(Tok::Punct(Punct::LParen))) {
        let mut depth = 0;
        let start = i;
        loop {
            match toks.get(i).map(|t| &t.tok) {
                Some(Tok::Punct(Punct::LParen)) => depth += 1,
                Some(Tok::Punct(Punct::RParen)) => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                None => return Err(syntax_at(&toks, start, "unclosed parameter list")),
                _ => {}
            }
            i += 1;
        }
        let nodes = build(&toks[start + 1..i])?;
        if !nodes.is_empty() {
            params = params_from(&nodes)?;
        }
        i += 1;
    }
    if matches!(toks.get(i).map(|t| &t.tok), Some(Tok::Punct(Punct::Semi))) {
        i += 1;
    }

    let end = (i..toks.len())
        .find(|&k| is_word(toks.get(k), "End") && is_word(toks.get(k + 1), "Transformation"))
        .ok_or_else(|| syntax_at(&toks, toks.len(), "missing `End Transformation schema`"))?;
    let mut tail = end + 2;
    if is_word(toks.get(tail), "schema") {
        tail += 1;
    }
    if matches!(toks.get(tail).map(|t| &t.tok), Some(Tok::Punct(Punct::Dot))) {
        tail += 1;
    }
    if tail < toks.len() {
        return Err(syntax_at(&toks, tail, "unexpected input after end of scheme"));
    }

    let mut sections = BTreeMap::new();
    let mut current: Option<(Section, usize)> = None;
    let mut k = i;
    while k <= end {
        let hdr = if k < end { header_at(&toks, k) } else { None };
        if hdr.is_some() || k == end {
            if let Some((s, from)) = current.take() {
                if sections.insert(s, build(&toks[from..k])?).is_some() {
                    return Err(syntax_at(&toks, from, &format!("section `{}` appears twice", s.title())));
                }
            } else if k > i {
                return Err(syntax_at(&toks, i, "expected a section header"));
            }
            if let Some((s, len)) = hdr {
                current = Some((s, k + len));
                k += len;
                continue;
            }
        }
        k += 1;
    }
    let scheme = TransformationScheme { name, params, sections };
    scheme.check_symbols()?;
    Ok(scheme)
}

impl TransformationScheme {
    pub fn arity_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for p in &self.params {
            match &p.shape {
                Shape::Scalar => {}
                Shape::Vector(v) => {
                    out.insert(v.clone());
                }
                Shape::Matrix { inner, outer } => {
                    out.insert(inner.clone());
                    out.insert(outer.clone());
                }
            }
        }
        out
    }

    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Relationship-type names introduced by the scheme, with the arity
    /// variables of their enclosing repetitions. Only schemes with
    /// parameters have template names.
    pub fn relationship_templates(&self) -> BTreeMap<String, Vec<String>> {
        let mut out = BTreeMap::new();
        if self.params.is_empty() {
            return out;
        }
        if let Some(nodes) = self.sections.get(&Section::RelationshipTypes) {
            collect_heads(nodes, &mut Vec::new(), Punct::Eq, &mut out);
        }
        out
    }

    fn constraint_ids(&self) -> BTreeSet<String> {
        let mut out = BTreeMap::new();
        if let Some(nodes) = self.sections.get(&Section::Constraints) {
            collect_heads(nodes, &mut Vec::new(), Punct::Colon, &mut out);
        }
        out.into_keys().collect()
    }

    fn check_symbols(&self) -> Result<(), SchemeError> {
        let vars = self.arity_vars();
        let rels = self.relationship_templates();
        let ids = self.constraint_ids();
        let mut err: Option<SchemeError> = None;
        for nodes in self.sections.values() {
            check_repeat_vars(nodes, &vars, &mut err);
            visit_idents(nodes, &mut Vec::new(), &mut |t, name, enclosing| {
                if err.is_some() {
                    return;
                }
                let needs: Vec<&str> = match self.param(name).map(|p| &p.shape) {
                    Some(Shape::Scalar) => Vec::new(),
                    Some(Shape::Vector(v)) => alloc::vec![v.as_str()],
                    Some(Shape::Matrix { inner, outer }) => alloc::vec![inner.as_str(), outer.as_str()],
                    None => match rels.get(name) {
                        Some(vs) => vs.iter().map(String::as_str).collect(),
                        None => {
                            let known = self.params.is_empty()
                                || vars.contains(name)
                                || ids.contains(name)
                                || KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(name));
                            if !known {
                                err = Some(SchemeError::UnknownSymbol(format!("{name} at {}:{}", t.line, t.col)));
                            }
                            Vec::new()
                        }
                    },
                };
                if let Some(v) = needs.iter().find(|v| !enclosing.contains(v)) {
                    err = Some(SchemeError::ArityNotation(format!(
                        "{name} at {}:{} is used outside a repetition over {v}",
                        t.line, t.col
                    )));
                }
            });
        }
        err.map_or(Ok(()), Err)
    }

    /// The scheme read in the opposite direction.
    pub fn inverted(&self) -> TransformationScheme {
        let mut out = self.clone();
        let swap = |a, b, s: &mut BTreeMap<Section, Vec<Node>>| {
            let x = s.remove(&a);
            let y = s.remove(&b);
            if let Some(x) = x {
                s.insert(b, x);
            }
            if let Some(y) = y {
                s.insert(a, y);
            }
        };
        swap(Section::From, Section::To, &mut out.sections);
        swap(Section::DerivationRules, Section::UpdateRules, &mut out.sections);
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("Transformation schema {}", self.name);
        if !self.params.is_empty() {
            let ps: Vec<String> = self
                .params
                .iter()
                .map(|p| match &p.shape {
                    Shape::Scalar => p.name.clone(),
                    Shape::Vector(v) => format!("{}!{v}", p.name),
                    Shape::Matrix { inner, outer } => format!("({}!{inner})!{outer}", p.name),
                })
                .collect();
            let _ = write!(out, " ({})", ps.join(", "));
        }
        out.push_str(";\n");
        for (s, nodes) in &self.sections {
            let _ = writeln!(out, "  {}:", s.title());
            out.push_str("    ");
            write_nodes(&mut out, nodes);
            out.push('\n');
        }
        out.push_str("End Transformation schema.\n");
        out
    }
}

fn check_repeat_vars(nodes: &[Node], vars: &BTreeSet<String>, err: &mut Option<SchemeError>) {
    for n in nodes {
        match n {
            Node::Repeat { body, var, .. } => {
                if !vars.contains(var) && err.is_none() {
                    *err = Some(SchemeError::ArityNotation(format!("`!{var}` uses an arity variable not fixed by the parameters")));
                }
                check_repeat_vars(body, vars, err);
            }
            Node::Group { body, .. } => check_repeat_vars(body, vars, err),
            Node::Tok(_) => {}
        }
    }
}

/// Identifiers followed by `sep` at item starts: relationship-type heads
/// (`f = [...]`) or constraint ids (`c1: ...`).
fn collect_heads(nodes: &[Node], vars: &mut Vec<String>, sep: Punct, out: &mut BTreeMap<String, Vec<String>>) {
    let mut at_start = true;
    for (i, n) in nodes.iter().enumerate() {
        match n {
            Node::Tok(Token { tok: Tok::Ident(s), .. }) if at_start => {
                if matches!(nodes.get(i + 1), Some(Node::Tok(Token { tok: Tok::Punct(p), .. })) if *p == sep) {
                    out.insert(s.clone(), vars.clone());
                }
                at_start = false;
            }
            Node::Tok(Token { tok: Tok::Punct(Punct::Comma | Punct::Semi), .. }) => at_start = true,
            Node::Repeat { body, var, .. } if at_start => {
                vars.push(var.clone());
                collect_heads(body, vars, sep, out);
                vars.pop();
                at_start = false;
            }
            _ => at_start = false,
        }
    }
}

pub use template::Node as TemplateNode;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{OLYMPICS_LIST, OT_EMISSION};
    use alloc::vec;

    fn ot() -> TransformationScheme {
        parse_scheme(OT_EMISSION).unwrap()
    }

    #[test]
    fn header_and_templates() {
        let s = ot();
        assert_eq!(s.name, "OTEmission");
        assert_eq!(s.params.len(), 10);
        assert_eq!(s.arity_vars(), ["m", "n"].iter().map(|v| v.to_string()).collect());
        assert_eq!(s.param("r").unwrap().shape, Shape::Matrix { inner: "n".into(), outer: "m".into() });
        let keys: Vec<String> = s.relationship_templates().into_keys().collect();
        assert_eq!(keys, vec!["f".to_string(), "g".into(), "h".into()]);
    }

    #[test]
    fn undeclared_symbol_is_refused() {
        let src = OT_EMISSION.replace("f!m;\n      To:", "f!m, zz;\n      To:");
        assert!(matches!(parse_scheme(&src), Err(SchemeError::UnknownSymbol(s)) if s.starts_with("zz")));
    }

    #[test]
    fn duplicate_parameter_is_refused() {
        let src = OT_EMISSION.replace("(x!n,", "(x!n, y,");
        assert_eq!(parse_scheme(&src), Err(SchemeError::DuplicateName("y".into())));
    }

    #[test]
    fn text_round_trip() {
        let s = ot();
        assert_eq!(parse_scheme(&s.to_text()).unwrap(), s);
        let inv = s.inverted();
        assert_ne!(inv, s);
        assert_eq!(inv.inverted(), s);
    }

    #[test]
    fn instantiate_olympics() {
        let t = instantiate(&ot(), &parse_parlist(OLYMPICS_LIST).unwrap(), None).unwrap();
        assert_eq!(t.from.len(), 3);
        assert!(t.to.iter().any(|n| n == "won-medals-of-in"));
        assert_eq!(invert(&invert(&t).unwrap()).unwrap(), t);
    }

    #[test]
    fn arity_mismatch() {
        let short = OLYMPICS_LIST.replace(", ['G', 'S', 'B'])", ", ['G', 'S'])");
        let r = instantiate(&ot(), &parse_parlist(&short).unwrap(), None);
        assert!(matches!(r, Err(SchemeError::ArityMismatch(_))), "{r:?}");
        let missing = OLYMPICS_LIST.replace(", ['G', 'S', 'B'])", ")");
        assert!(instantiate(&ot(), &parse_parlist(&missing).unwrap(), None).is_err());
    }

    #[test]
    fn no_update_rules_no_inverse() {
        let t = instantiate(&ot(), &parse_parlist(OLYMPICS_LIST).unwrap(), None).unwrap();
        let mut one_way = t.clone();
        one_way.update_rules.clear();
        assert_eq!(invert(&one_way), Err(SchemeError::MissingRules("update")));
        let mut other = t;
        other.derivation_rules.clear();
        assert_eq!(invert(&other), Err(SchemeError::MissingRules("derivation")));
    }
}
