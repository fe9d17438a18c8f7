//! Type and role identifiers.
//!
//! Types and roles share one namespace; the newtypes only keep the two
//! apart in signatures.

use alloc::string::String;
use core::borrow::Borrow;
use core::fmt;

macro_rules! ident {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.into())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

ident!(
    /// Name of an object type, value type or relationship type.
    TypeId
);
ident!(
    /// Name of a role (predicator).
    RoleId
);

impl RoleId {
    /// Stem of a role name, i.e. the name without a trailing `-<digits>`.
    pub fn stem(&self) -> &str {
        match self.0.rfind('-') {
            Some(i) if i > 0 && i + 1 < self.0.len() && self.0[i + 1..].bytes().all(|b| b.is_ascii_digit()) => {
                &self.0[..i]
            }
            _ => &self.0,
        }
    }
}
