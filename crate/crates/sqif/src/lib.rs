//! Std front end for `sqif-core`: JSON report documents, a rayon executor
//! for brute-force enumeration, the `sqif` command line and the results
//! table harness.

pub mod cli;
pub mod document;
mod error;
pub mod executor;
pub mod table;

pub use error::CliError;
