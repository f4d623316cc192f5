//! Config parsing, subcommand dispatch and report writing for `lespec`.
//!
//! Every subcommand writes `<name>.json` (the config, the checks and the
//! module output), optional CSV data, and `<name>.meta.json` with timing.
//! Floats are written with 17 significant digits.

pub mod config;
pub mod json;
pub mod report;
pub mod run;

pub use config::{emit_config, parse_config, Command, ConfigError, RunConfig, Tolerances};
pub use report::{Check, Relation, Report};
pub use run::{output_dir, run, RunError, RunOutcome, DEFAULT_OUT_DIR, OUT_DIR_ENV};
