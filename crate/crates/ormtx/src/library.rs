//! Transformation schemes shipped with the tool, each with a sample
//! parameter list.

use ormtx_core::scheme::{parse_parlist, parse_scheme, ParList, SchemeError, TransformationScheme};

pub struct Entry {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
    pub example: &'static str,
    /// Whether instances preserve equivalence or strengthen.
    pub strengthening: bool,
}

pub const SCHEMES: &[Entry] = &[
    Entry {
        name: "ot-emission",
        summary: "absorb relationship types into one with a new object type",
        text: include_str!("../library/ot-emission.scheme"),
        example: include_str!("../library/ot-emission.olympics.parlist"),
        strengthening: false,
    },
    Entry {
        name: "pred-generalise-unary",
        summary: "generalise unary fact types into a binary over a new object type",
        text: include_str!("../library/pred-generalise-unary.scheme"),
        example: include_str!("../library/pred-generalise-unary.hospital.parlist"),
        strengthening: false,
    },
    Entry {
        name: "ot-absorb-context",
        summary: "absorb a qualifying value type into specialised fact types",
        text: include_str!("../library/ot-absorb-context.scheme"),
        example: include_str!("../library/ot-absorb-context.rally.parlist"),
        strengthening: false,
    },
    Entry {
        name: "strengthen-split",
        summary: "split a fact type of frequency at most two into two functional ones",
        text: include_str!("../library/strengthen-split.scheme"),
        example: include_str!("../library/strengthen-split.car-driver.parlist"),
        strengthening: true,
    },
];

pub fn entry(name: &str) -> Option<&'static Entry> {
    SCHEMES.iter().find(|e| e.name == name)
}

pub fn load(name: &str) -> Option<Result<TransformationScheme, SchemeError>> {
    entry(name).map(|e| parse_scheme(e.text))
}

impl Entry {
    pub fn scheme(&self) -> Result<TransformationScheme, SchemeError> {
        parse_scheme(self.text)
    }

    pub fn example_parlist(&self) -> Result<ParList, SchemeError> {
        parse_parlist(self.example)
    }
}
