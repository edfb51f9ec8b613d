//! Verification suites, object evaluation and report rendering on top of gln-local.

pub mod config;
pub mod eval;
pub mod report;
pub mod suites;

pub use config::{ConfigError, RunConfig, Suite};
pub use eval::{eval, EvalArgs, Object};
pub use report::{Check, Format, Report, SCHEMA};
pub use suites::run_suite;
