//! Configuration loading, command dispatch and file output for the
//! `metaring` command-line tool.

// `!(x > 0.0)` is the idiom used throughout to reject NaN along with
// non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use error::CliError;
pub use run::{run, Command, RunManifest};
