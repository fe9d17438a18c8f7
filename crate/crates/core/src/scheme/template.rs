//! Token trees with arity repetitions.
//!
//! `x!n` repeats a symbol, `( ... )!n` repeats a group without its
//! parentheses, `<...>!n` repeats a tuple and `UNION OF ( ... )!n` repeats a
//! rule body joined by `UNION`. Every other bracket pair is kept verbatim.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::SchemeError;
use crate::error::ParseError;
use crate::lex::{Punct, Tok, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sep {
    Comma,
    Union,
}

#[derive(Clone, Debug)]
pub enum Node {
    Tok(Token),
    Group { open: Punct, close: Punct, body: Vec<Node>, at: Token },
    Repeat { body: Vec<Node>, var: String, sep: Sep },
}

impl PartialEq for Node {
    // Positions are ignored.
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Node::Tok(a), Node::Tok(b)) => a.tok == b.tok,
            (Node::Group { open: a, body: x, .. }, Node::Group { open: b, body: y, .. }) => a == b && x == y,
            (Node::Repeat { body: x, var: v, sep: s }, Node::Repeat { body: y, var: w, sep: t }) => {
                x == y && v == w && s == t
            }
            _ => false,
        }
    }
}

impl Eq for Node {}

fn closer(p: Punct) -> Option<Punct> {
    match p {
        Punct::LParen => Some(Punct::RParen),
        Punct::LBracket => Some(Punct::RBracket),
        Punct::LBrace => Some(Punct::RBrace),
        Punct::Lt => Some(Punct::Gt),
        _ => None,
    }
}

fn syntax(t: &Token, msg: String) -> SchemeError {
    SchemeError::Parse(ParseError::Syntax { line: t.line, col: t.col, msg })
}

/// Builds the node forest for a token slice.
pub fn build(toks: &[Token]) -> Result<Vec<Node>, SchemeError> {
    let mut pos = 0;
    let nodes = build_until(toks, &mut pos, None)?;
    Ok(nodes)
}

fn build_until(toks: &[Token], pos: &mut usize, close: Option<(Punct, &Token)>) -> Result<Vec<Node>, SchemeError> {
    let mut out: Vec<Node> = Vec::new();
    while *pos < toks.len() {
        let t = &toks[*pos];
        match &t.tok {
            Tok::Punct(p) if Some(*p) == close.map(|c| c.0) => {
                *pos += 1;
                return Ok(out);
            }
            Tok::Punct(Punct::RParen | Punct::RBracket | Punct::RBrace | Punct::Gt) => {
                return Err(syntax(t, format!("unbalanced `{}`", t.tok)));
            }
            Tok::Punct(Punct::Bang) => {
                let var = match toks.get(*pos + 1).map(|x| &x.tok) {
                    Some(Tok::Ident(v)) => v.clone(),
                    _ => return Err(SchemeError::ArityNotation(format!("{}:{}: `!` must be followed by an arity variable", t.line, t.col))),
                };
                let Some(prev) = out.pop() else {
                    return Err(SchemeError::ArityNotation(format!("{}:{}: `!{var}` has nothing to repeat", t.line, t.col)));
                };
                *pos += 2;
                let union = out.len() >= 2
                    && matches!(&out[out.len() - 2], Node::Tok(Token { tok: Tok::Ident(u), .. }) if u.eq_ignore_ascii_case("UNION"))
                    && matches!(&out[out.len() - 1], Node::Tok(Token { tok: Tok::Ident(o), .. }) if o.eq_ignore_ascii_case("OF"));
                let node = match prev {
                    Node::Group { open: Punct::LParen, body, at, close } if union => {
                        out.truncate(out.len() - 2);
                        Node::Repeat { body: alloc::vec![Node::Group { open: Punct::LParen, close, body, at }], var, sep: Sep::Union }
                    }
                    Node::Group { open: Punct::LParen, body, .. } => Node::Repeat { body, var, sep: Sep::Comma },
                    g @ Node::Group { open: Punct::Lt, .. } => Node::Repeat { body: alloc::vec![g], var, sep: Sep::Comma },
                    n @ Node::Tok(Token { tok: Tok::Ident(_), .. }) => Node::Repeat { body: alloc::vec![n], var, sep: Sep::Comma },
                    n @ Node::Repeat { .. } => Node::Repeat { body: alloc::vec![n], var, sep: Sep::Comma },
                    _ => return Err(SchemeError::ArityNotation(format!("{}:{}: `!{var}` cannot follow this", t.line, t.col))),
                };
                out.push(node);
            }
            Tok::Punct(p) if closer(*p).is_some() => {
                *pos += 1;
                let c = closer(*p).unwrap();
                let body = build_until(toks, pos, Some((c, t)))?;
                out.push(Node::Group { open: *p, close: c, body, at: t.clone() });
            }
            _ => {
                out.push(Node::Tok(t.clone()));
                *pos += 1;
            }
        }
    }
    match close {
        Some((c, open)) => Err(syntax(open, format!("missing `{}`", c.as_str()))),
        None => Ok(out),
    }
}

/// Symbol lookup used during expansion.
pub trait Resolve {
    fn arity(&self, var: &str) -> Option<usize>;
    /// The token standing for `name` under the current repetition indexes,
    /// or `None` when `name` is not a symbol and should be copied as is.
    fn resolve(&self, name: &str, idx: &BTreeMap<String, usize>, at: &Token) -> Result<Option<Tok>, SchemeError>;
}

pub fn expand(nodes: &[Node], r: &dyn Resolve, out: &mut Vec<Token>) -> Result<(), SchemeError> {
    expand_in(nodes, r, &mut BTreeMap::new(), out)
}

fn expand_in(nodes: &[Node], r: &dyn Resolve, idx: &mut BTreeMap<String, usize>, out: &mut Vec<Token>) -> Result<(), SchemeError> {
    for n in nodes {
        match n {
            Node::Tok(t) => {
                let tok = match &t.tok {
                    Tok::Ident(name) => match r.resolve(name, idx, t)? {
                        Some(x) => x,
                        None => t.tok.clone(),
                    },
                    other => other.clone(),
                };
                out.push(Token { tok, line: t.line, col: t.col });
            }
            Node::Group { open, close, body, at } => {
                out.push(Token { tok: Tok::Punct(*open), line: at.line, col: at.col });
                expand_in(body, r, idx, out)?;
                out.push(Token { tok: Tok::Punct(*close), line: at.line, col: at.col });
            }
            Node::Repeat { body, var, sep } => {
                let count = r.arity(var).ok_or_else(|| SchemeError::ArityNotation(format!("unknown arity variable `{var}`")))?;
                let at = first_token(body);
                let prev = idx.insert(var.clone(), 0);
                for k in 1..=count {
                    if k > 1 {
                        let tok = match sep {
                            Sep::Comma => Tok::Punct(Punct::Comma),
                            Sep::Union => Tok::Ident("UNION".into()),
                        };
                        out.push(Token { tok, line: at.0, col: at.1 });
                    }
                    idx.insert(var.clone(), k);
                    expand_in(body, r, idx, out)?;
                }
                match prev {
                    Some(p) => idx.insert(var.clone(), p),
                    None => idx.remove(var),
                };
            }
        }
    }
    Ok(())
}

fn first_token(nodes: &[Node]) -> (u32, u32) {
    match nodes.first() {
        Some(Node::Tok(t)) => (t.line, t.col),
        Some(Node::Group { at, .. }) => (at.line, at.col),
        Some(Node::Repeat { body, .. }) => first_token(body),
        None => (0, 0),
    }
}

/// Calls `f` for every identifier token together with the arity variables
/// of its enclosing repetitions, outermost first.
pub fn visit_idents<'a>(nodes: &'a [Node], vars: &mut Vec<&'a str>, f: &mut dyn FnMut(&'a Token, &str, &[&'a str])) {
    for n in nodes {
        match n {
            Node::Tok(t) => {
                if let Tok::Ident(s) = &t.tok {
                    f(t, s, vars);
                }
            }
            Node::Group { body, .. } => visit_idents(body, vars, f),
            Node::Repeat { body, var, .. } => {
                vars.push(var);
                visit_idents(body, vars, f);
                vars.pop();
            }
        }
    }
}

pub fn write_nodes(out: &mut String, nodes: &[Node]) {
    for (i, n) in nodes.iter().enumerate() {
        let tight = match n {
            Node::Tok(Token { tok: Tok::Punct(Punct::Comma | Punct::Semi | Punct::Colon), .. }) => true,
            Node::Group { open: Punct::LParen | Punct::LBracket, .. } => {
                i > 0 && matches!(&nodes[i - 1], Node::Tok(Token { tok: Tok::Ident(_), .. }))
            }
            _ => false,
        };
        if i > 0 && !tight {
            out.push(' ');
        }
        write_node(out, n);
    }
}

fn write_node(out: &mut String, n: &Node) {
    match n {
        Node::Tok(t) => {
            let _ = write!(out, "{}", t.tok);
        }
        Node::Group { open, close, body, .. } => {
            out.push_str(open.as_str());
            write_nodes(out, body);
            out.push_str(close.as_str());
        }
        Node::Repeat { body, var, sep } => {
            match (sep, body.as_slice()) {
                (Sep::Union, [g]) => {
                    out.push_str("UNION OF ");
                    write_node(out, g);
                }
                (Sep::Comma, [n @ Node::Tok(_)]) | (Sep::Comma, [n @ Node::Group { open: Punct::Lt, .. }]) => write_node(out, n),
                _ => {
                    out.push('(');
                    write_nodes(out, body);
                    out.push(')');
                }
            }
            let _ = write!(out, "!{var}");
        }
    }
}
