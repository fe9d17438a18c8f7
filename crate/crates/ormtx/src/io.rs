//! Reading the file formats from disk.

use std::path::{Path, PathBuf};

use ormtx_core::bounds::{parse_bounds, Bounds};
use ormtx_core::population::parse_population;
use ormtx_core::schema::parse_schema;
use ormtx_core::scheme::{parse_parlist, parse_scheme, ParList, SchemeError, TransformationScheme};
use ormtx_core::{ParseError, Population, Schema};

use crate::library;

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("{}: {source}", path.display())]
    Scheme { path: PathBuf, source: SchemeError },
    #[error("`{0}` is neither a shipped scheme nor a file")]
    UnknownScheme(String),
    #[error("{0}")]
    Usage(String),
}

pub fn read_text(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|source| InputError::Io { path: path.to_owned(), source })
}

fn parse_err(path: &Path) -> impl FnOnce(ParseError) -> InputError + '_ {
    move |source| InputError::Parse { path: path.to_owned(), source }
}

pub fn read_schema(path: &Path) -> Result<Schema, InputError> {
    parse_schema(&read_text(path)?).map_err(parse_err(path))
}

pub fn read_bounds(path: &Path) -> Result<Bounds, InputError> {
    parse_bounds(&read_text(path)?).map_err(parse_err(path))
}

pub fn read_population(path: &Path, schema: &Schema) -> Result<Population, InputError> {
    parse_population(&read_text(path)?, schema).map_err(parse_err(path))
}

pub fn read_parlist(path: &Path) -> Result<ParList, InputError> {
    parse_parlist(&read_text(path)?).map_err(|source| InputError::Scheme { path: path.to_owned(), source })
}

/// A scheme by library name or file path, with the library's sample
/// parameter list when there is one.
pub struct LoadedScheme {
    pub scheme: TransformationScheme,
    pub example: Option<ParList>,
}

pub fn read_scheme(name_or_path: &str) -> Result<LoadedScheme, InputError> {
    let here = PathBuf::from(format!("<library>/{name_or_path}"));
    if let Some(e) = library::entry(name_or_path) {
        let scheme = e.scheme().map_err(|source| InputError::Scheme { path: here.clone(), source })?;
        let example = e.example_parlist().map_err(|source| InputError::Scheme { path: here, source })?;
        return Ok(LoadedScheme { scheme, example: Some(example) });
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(InputError::UnknownScheme(name_or_path.to_owned()));
    }
    let scheme = parse_scheme(&read_text(path)?).map_err(|source| InputError::Scheme { path: path.to_owned(), source })?;
    Ok(LoadedScheme { scheme, example: None })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), InputError> {
    std::fs::write(path, text).map_err(|source| InputError::Io { path: path.to_owned(), source })
}
