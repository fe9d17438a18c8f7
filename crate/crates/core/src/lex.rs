//! Tokenizer and token cursor shared by every text format.
//!
//! Identifiers may contain `-` and `.` between alphanumerics, so role names
//! such as `won-gold-in-1` and `MedalKind.code-2` are single tokens while
//! `->` and `..` stay punctuation. `#` starts a line comment.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::ParseError;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Punct {
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Comma,
    Semi,
    Colon,
    Eq,
    Bang,
    Dot,
    DotDot,
    Arrow,
}

impl Punct {
    pub fn as_str(self) -> &'static str {
        match self {
            Punct::LParen => "(",
            Punct::RParen => ")",
            Punct::LBracket => "[",
            Punct::RBracket => "]",
            Punct::LBrace => "{",
            Punct::RBrace => "}",
            Punct::Lt => "<",
            Punct::Gt => ">",
            Punct::Comma => ",",
            Punct::Semi => ";",
            Punct::Colon => ":",
            Punct::Eq => "=",
            Punct::Bang => "!",
            Punct::Dot => ".",
            Punct::DotDot => "..",
            Punct::Arrow => "->",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    Punct(Punct),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => f.write_str(s),
            Tok::Str(s) => write!(f, "'{s}'"),
            Tok::Int(i) => write!(f, "{i}"),
            Tok::Punct(p) => f.write_str(p.as_str()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn ident_cont(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let start = i;
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: tl, col: tc });
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if ident_start(c) {
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                if ident_cont(d) {
                    i += 1;
                } else if (d == '-' || d == '.') && i + 1 < chars.len() && ident_cont(chars[i + 1]) {
                    i += 2;
                } else {
                    break;
                }
            }
            push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse::<i64>().map_err(|_| syntax(tl, tc, format!("integer `{s}` out of range")))?;
            push(&mut out, Tok::Int(n));
        } else if c == '\'' {
            i += 1;
            let body = i;
            while i < chars.len() && chars[i] != '\'' && chars[i] != '\n' {
                i += 1;
            }
            if i >= chars.len() || chars[i] != '\'' {
                return Err(syntax(tl, tc, "unterminated string literal".to_string()));
            }
            push(&mut out, Tok::Str(chars[body..i].iter().collect()));
            i += 1;
        } else {
            let next = chars.get(i + 1).copied();
            let (p, len) = match (c, next) {
                ('-', Some('>')) => (Punct::Arrow, 2),
                ('.', Some('.')) => (Punct::DotDot, 2),
                ('\u{2192}', _) => (Punct::Arrow, 1),
                ('(', _) => (Punct::LParen, 1),
                (')', _) => (Punct::RParen, 1),
                ('[', _) => (Punct::LBracket, 1),
                (']', _) => (Punct::RBracket, 1),
                ('{', _) => (Punct::LBrace, 1),
                ('}', _) => (Punct::RBrace, 1),
                ('<', _) => (Punct::Lt, 1),
                ('>', _) => (Punct::Gt, 1),
                (',', _) => (Punct::Comma, 1),
                (';', _) => (Punct::Semi, 1),
                (':', _) => (Punct::Colon, 1),
                ('=', _) => (Punct::Eq, 1),
                ('!', _) => (Punct::Bang, 1),
                ('.', _) => (Punct::Dot, 1),
                _ => return Err(syntax(tl, tc, format!("unexpected character `{c}`"))),
            };
            push(&mut out, Tok::Punct(p));
            i += len;
        }
        col += (i - start) as u32;
    }
    Ok(out)
}

fn syntax(line: u32, col: u32, msg: String) -> ParseError {
    ParseError::Syntax { line, col, msg }
}

/// Cursor over a token stream with the helpers every parser needs.
pub struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        Self { toks, pos: 0 }
    }

    pub fn from_str(src: &str) -> Result<Self, ParseError> {
        Ok(Self::new(tokenize(src)?))
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn set_pos(&mut self, pos: usize) {
        self.pos = pos;
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    pub fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = match self.toks.get(self.pos).or_else(|| self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        };
        let mut msg = msg.into();
        match self.peek() {
            Some(t) => msg.push_str(&format!(", found `{t}`")),
            None => msg.push_str(", found end of input"),
        }
        syntax(line, col, msg)
    }

    pub fn is_punct(&self, p: Punct) -> bool {
        self.peek() == Some(&Tok::Punct(p))
    }

    pub fn eat_punct(&mut self, p: Punct) -> bool {
        if self.is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_punct(&mut self, p: Punct) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", p.as_str())))
        }
    }

    /// Keywords are matched case-insensitively.
    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s.eq_ignore_ascii_case(kw))
    }

    pub fn is_kw_at(&self, k: usize, kw: &str) -> bool {
        matches!(self.peek_at(k), Some(Tok::Ident(s)) if s.eq_ignore_ascii_case(kw))
    }

    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{kw}`")))
        }
    }

    pub fn eat_kws(&mut self, kws: &[&str]) -> bool {
        if kws.iter().enumerate().all(|(k, kw)| self.is_kw_at(k, kw)) {
            self.pos += kws.len();
            true
        } else {
            false
        }
    }

    pub fn expect_kws(&mut self, kws: &[&str]) -> Result<(), ParseError> {
        if self.eat_kws(kws) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", kws.join(" "))))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    pub fn int(&mut self) -> Result<i64, ParseError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.error("expected integer")),
        }
    }

    pub fn literal(&mut self) -> Result<Value, ParseError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(Value::Int(n))
            }
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(Value::Str(s))
            }
            _ => Err(self.error("expected literal")),
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self.peek(), Some(Tok::Int(_)) | Some(Tok::Str(_)))
    }

    pub fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn role_names_are_single_tokens() {
        assert_eq!(
            toks("MedalKind.code-2 = won-gold-in-1"),
            vec![
                Tok::Ident("MedalKind.code-2".into()),
                Tok::Punct(Punct::Eq),
                Tok::Ident("won-gold-in-1".into()),
            ]
        );
    }

    #[test]
    fn arrows_ranges_and_comments() {
        assert_eq!(
            toks("a->b 1..2 # tail\n'G'"),
            vec![
                Tok::Ident("a".into()),
                Tok::Punct(Punct::Arrow),
                Tok::Ident("b".into()),
                Tok::Int(1),
                Tok::Punct(Punct::DotDot),
                Tok::Int(2),
                Tok::Str("G".into()),
            ]
        );
    }

    #[test]
    fn positions_are_tracked() {
        let t = tokenize("a\n  ;").unwrap();
        assert_eq!((t[1].line, t[1].col), (2, 3));
        let e = tokenize("a\n @").unwrap_err();
        assert_eq!(e, ParseError::Syntax { line: 2, col: 2, msg: "unexpected character `@`".into() });
    }
}
