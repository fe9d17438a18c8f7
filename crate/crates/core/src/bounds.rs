//! Enumeration bounds.
//!
//! ```text
//! BOUNDS ;
//! DOMAIN nat = { 1, 2 } ;
//! POOL Country = 2 ;
//! CAP = 1048576 ;
//! END
//! ```
//!
//! `DOMAIN` finitises a domain the schema leaves unbounded, `POOL` gives the
//! number of anonymous instances `Val(T,'#k')` available to an entity type,
//! and `CAP` limits the raw state space.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use crate::error::ParseError;
use crate::lex::{Cursor, Punct};
use crate::name::TypeId;
use crate::schema::DomainValues;
use crate::value::Value;

pub const DEFAULT_CAP: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub domains: BTreeMap<String, BTreeSet<Value>>,
    pub pools: BTreeMap<TypeId, usize>,
    pub cap: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self { domains: BTreeMap::new(), pools: BTreeMap::new(), cap: DEFAULT_CAP }
    }
}

impl Bounds {
    pub fn with_domain(mut self, name: &str, values: impl IntoIterator<Item = Value>) -> Self {
        self.domains.insert(name.into(), values.into_iter().collect());
        self
    }

    pub fn with_pool(mut self, t: &str, k: usize) -> Self {
        self.pools.insert(t.into(), k);
        self
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    /// Values of a domain: the declared ones when finite, else the bound.
    pub fn resolve(&self, name: &str, declared: Option<&DomainValues>) -> Option<BTreeSet<Value>> {
        match declared {
            Some(Some(vs)) => Some(vs.clone()),
            _ => self.domains.get(name).cloned(),
        }
    }
}

pub fn parse_bounds(src: &str) -> Result<Bounds, ParseError> {
    let mut c = Cursor::from_str(src)?;
    c.expect_kw("BOUNDS")?;
    c.eat_punct(Punct::Semi);
    let mut b = Bounds::default();
    while !c.eat_kw("END") {
        if c.eat_kw("DOMAIN") {
            let name = c.ident()?;
            c.expect_punct(Punct::Eq)?;
            let vals = crate::schema::value_list(&mut c)?;
            if b.domains.insert(name.clone(), vals.into_iter().collect()).is_some() {
                return Err(ParseError::DuplicateName(name));
            }
        } else if c.eat_kw("POOL") {
            let t = TypeId::new(c.ident()?);
            c.expect_punct(Punct::Eq)?;
            let k = c.int()?;
            let k = usize::try_from(k).map_err(|_| c.error("pool size out of range"))?;
            if b.pools.insert(t.clone(), k).is_some() {
                return Err(ParseError::DuplicateName(t.0));
            }
        } else if c.eat_kw("CAP") {
            c.expect_punct(Punct::Eq)?;
            let n = c.int()?;
            b.cap = u64::try_from(n).map_err(|_| c.error("cap out of range"))?;
        } else {
            return Err(c.error("expected DOMAIN, POOL, CAP or END"));
        }
        c.expect_punct(Punct::Semi)?;
    }
    c.expect_end()?;
    Ok(b)
}

pub fn serialize_bounds(b: &Bounds) -> String {
    let mut out = String::from("BOUNDS ;\n");
    for (name, vs) in &b.domains {
        let vals: alloc::vec::Vec<String> = vs.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "DOMAIN {name} = {{ {} }} ;", vals.join(", "));
    }
    for (t, k) in &b.pools {
        let _ = writeln!(out, "POOL {t} = {k} ;");
    }
    let _ = writeln!(out, "CAP = {} ;\nEND", b.cap);
    out
}
