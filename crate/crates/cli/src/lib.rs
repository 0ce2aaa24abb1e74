//! Command-line front end: argument parsing, the structured run report and
//! the invariant suite behind `verify`.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod commands;
pub mod error;
pub mod report;

pub use commands::{Cli, Command};
pub use error::CliError;
pub use report::{RunReport, Status};
