//! File formats, the shipped scheme library and the command line for
//! `ormtx-core`.

pub mod cli;
pub mod io;
pub mod library;
pub mod report;
